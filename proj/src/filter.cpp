#include "belong/filter.hpp"

#include <algorithm>
#include <cmath>

#include "belong/error.hpp"

namespace belong {

FilterParams warm_tint(std::size_t channels) {
    if (channels == 3) return {{1.06, 1.0, 0.94}, {0.02, 0.0, -0.01}, 0.95};
    return {{1.04}, {0.015}, 0.95};
}

Tensor apply_filter(const Tensor& image, const FilterParams& p) {
    if (image.rank() != 3) throw ShapeError("apply_filter expects a [C,H,W] image, got " + shape_to_string(image.shape()));
    const std::size_t channels = image.shape()[0];
    auto per_channel = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != 1 && v.size() != channels) {
            throw Error(std::string("filter ") + name + " needs 1 or " + std::to_string(channels) + " entries");
        }
    };
    per_channel(p.gain, "gain");
    per_channel(p.bias, "bias");
    for (double g : p.gain) {
        if (!(g > 0.0)) throw Error("filter gain must be positive");
    }
    if (!(p.gamma > 0.0)) throw Error("filter gamma must be positive");

    const std::size_t plane = image.size() / channels;
    std::vector<double> out(image.size());
    const auto x = image.data();
    for (std::size_t c = 0; c < channels; ++c) {
        const double gain = p.gain.size() == 1 ? p.gain[0] : p.gain[c];
        const double bias = p.bias.size() == 1 ? p.bias[0] : p.bias[c];
        for (std::size_t i = c * plane; i < (c + 1) * plane; ++i) {
            const double base = std::max(0.0, gain * x[i] + bias);
            out[i] = std::clamp(std::pow(base, p.gamma), 0.0, 1.0);
        }
    }
    return Tensor::from_doubles(image.shape(), out);
}

}  // namespace belong
