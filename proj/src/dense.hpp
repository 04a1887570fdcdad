#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace belong::detail {

enum class Activation { identity, tanh, sigmoid };

struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;  // out x in, row-major
    std::vector<double> bias;
    Activation activation = Activation::identity;
};

inline double activate(Activation a, double v) {
    switch (a) {
        case Activation::tanh: return std::tanh(v);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
        case Activation::identity: break;
    }
    return v;
}

// Derivative expressed through the activation's output y.
inline double activate_grad(Activation a, double y) {
    switch (a) {
        case Activation::tanh: return 1.0 - y * y;
        case Activation::sigmoid: return y * (1.0 - y);
        case Activation::identity: break;
    }
    return 1.0;
}

inline void dense_forward(const Dense& layer, std::span<const double> x, std::vector<double>& y) {
    y.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weight.data() + o * layer.in;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * x[i];
        y[o] = activate(layer.activation, acc);
    }
}

// Turns dL/dy into dL/dpre in place, then writes dL/dx.
// When weight_grad/bias_grad are non-null the parameter gradients are accumulated.
inline void dense_backward(const Dense& layer, std::span<const double> x, std::span<const double> y,
                           std::vector<double>& delta, std::vector<double>& grad_x, double* weight_grad = nullptr,
                           double* bias_grad = nullptr) {
    for (std::size_t o = 0; o < layer.out; ++o) delta[o] *= activate_grad(layer.activation, y[o]);
    grad_x.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* w = layer.weight.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) grad_x[i] += w[i] * d;
        if (weight_grad) {
            double* gw = weight_grad + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) gw[i] += d * x[i];
        }
        if (bias_grad) bias_grad[o] += d;
    }
}

struct Network {
    std::vector<Dense> layers;
    std::vector<double> codebook;  // grid models: K x pixels
    std::size_t codebook_rows = 0;
};

}  // namespace belong::detail
