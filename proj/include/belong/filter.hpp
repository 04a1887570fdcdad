#pragma once

#include <string>
#include <vector>

#include "belong/tensor.hpp"

namespace belong {

/// Per-channel affine map followed by a gamma curve:
/// out = clamp((gain_c * x + bias_c) ^ gamma, 0, 1).
/// gain and bias hold one entry per channel, or a single entry for all channels.
struct FilterParams {
    std::vector<double> gain{1.0};
    std::vector<double> bias{0.0};
    double gamma = 1.0;
};

/// A mild warm tint: red lifted, blue lowered, slight gamma brightening.
FilterParams warm_tint(std::size_t channels);

Tensor apply_filter(const Tensor& image, const FilterParams& params);

}  // namespace belong
