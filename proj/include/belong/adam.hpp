#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace belong {

struct AdamSettings {
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam over a flat parameter vector.
class Adam {
public:
    Adam(std::size_t size, AdamSettings settings) : settings_(settings), m_(size, 0.0), v_(size, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads);
    std::size_t steps() const { return t_; }
    void set_learning_rate(double lr) { settings_.learning_rate = lr; }

private:
    AdamSettings settings_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

}  // namespace belong
