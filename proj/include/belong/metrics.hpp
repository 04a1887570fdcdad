#pragma once

#include <span>
#include <string>
#include <vector>

#include "belong/tensor.hpp"

namespace belong {

/// Image distances. SSIM is reported as 1 - SSIM so lower is closer for every metric.
enum class MetricId { mse, mae, ssim };

std::string to_string(MetricId m);
MetricId parse_metric(const std::string& s);

// SSIM uses one global window per channel over the [0, 1] range and averages channels.
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

double distance(MetricId metric, const Tensor& a, const Tensor& b);
/// d distance / d a.
Tensor distance_gradient(MetricId metric, const Tensor& a, const Tensor& b);

// Double-precision kernels over flat [C, H*W] buffers. `channels` only matters for SSIM.
double distance(MetricId metric, std::span<const double> a, std::span<const double> b, std::size_t channels);
std::vector<double> distance_gradient(MetricId metric, std::span<const double> a, std::span<const double> b,
                                      std::size_t channels);

}  // namespace belong
