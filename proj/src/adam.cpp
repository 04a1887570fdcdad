#include "belong/adam.hpp"

#include <cmath>

namespace belong {

void Adam::step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    const double b1 = settings_.beta1;
    const double b2 = settings_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = m_[i] / correction1;
        const double v_hat = v_[i] / correction2;
        params[i] -= settings_.learning_rate * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
    }
}

}  // namespace belong
