#include "belong/metrics.hpp"

#include <cmath>

#include "belong/error.hpp"

namespace belong {

std::string to_string(MetricId m) {
    switch (m) {
        case MetricId::mse: return "mse";
        case MetricId::mae: return "mae";
        case MetricId::ssim: return "ssim";
    }
    return "?";
}

MetricId parse_metric(const std::string& s) {
    if (s == "mse") return MetricId::mse;
    if (s == "mae") return MetricId::mae;
    if (s == "ssim") return MetricId::ssim;
    throw Error("unknown metric '" + s + "' (expected mse, mae or ssim)");
}

namespace {

struct SsimStats {
    double mu_a, mu_b, var_a, var_b, cov;
};

SsimStats channel_stats(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
    }
    SsimStats s{sa / n, sb / n, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - s.mu_a;
        const double db = b[i] - s.mu_b;
        s.var_a += da * da;
        s.var_b += db * db;
        s.cov += da * db;
    }
    s.var_a /= n;
    s.var_b /= n;
    s.cov /= n;
    return s;
}

double ssim_value(const SsimStats& s) {
    const double num = (2.0 * s.mu_a * s.mu_b + kSsimC1) * (2.0 * s.cov + kSsimC2);
    const double den = (s.mu_a * s.mu_a + s.mu_b * s.mu_b + kSsimC1) * (s.var_a + s.var_b + kSsimC2);
    return num / den;
}

void check_sizes(std::span<const double> a, std::span<const double> b, std::size_t channels) {
    if (a.size() != b.size()) {
        throw ShapeError("distance: operand sizes differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw ShapeError("distance: empty images");
    if (channels == 0 || a.size() % channels != 0) throw ShapeError("distance: size not divisible by channels");
}

std::size_t channels_of(const Tensor& t) { return t.rank() == 3 ? t.shape()[0] : 1; }

void check_shapes(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("distance: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
    }
}

}  // namespace

double distance(MetricId metric, std::span<const double> a, std::span<const double> b, std::size_t channels) {
    check_sizes(a, b, channels);
    const double n = static_cast<double>(a.size());
    switch (metric) {
        case MetricId::mse: {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
            return acc / n;
        }
        case MetricId::mae: {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
            return acc / n;
        }
        case MetricId::ssim: {
            const std::size_t per = a.size() / channels;
            double total = 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
                total += ssim_value(channel_stats(a.subspan(c * per, per), b.subspan(c * per, per)));
            }
            // Clamp rounding noise so identical images give exactly 0.
            return std::max(0.0, 1.0 - total / static_cast<double>(channels));
        }
    }
    return 0.0;
}

std::vector<double> distance_gradient(MetricId metric, std::span<const double> a, std::span<const double> b,
                                      std::size_t channels) {
    check_sizes(a, b, channels);
    const double n = static_cast<double>(a.size());
    std::vector<double> g(a.size(), 0.0);
    switch (metric) {
        case MetricId::mse:
            for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * (a[i] - b[i]) / n;
            break;
        case MetricId::mae:
            // Subgradient 0 at ties.
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                g[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
            }
            break;
        case MetricId::ssim: {
            const std::size_t per = a.size() / channels;
            const double m = static_cast<double>(per);
            for (std::size_t c = 0; c < channels; ++c) {
                const auto ac = a.subspan(c * per, per);
                const auto bc = b.subspan(c * per, per);
                const SsimStats s = channel_stats(ac, bc);
                const double a1 = 2.0 * s.mu_a * s.mu_b + kSsimC1;
                const double a2 = 2.0 * s.cov + kSsimC2;
                const double b1 = s.mu_a * s.mu_a + s.mu_b * s.mu_b + kSsimC1;
                const double b2 = s.var_a + s.var_b + kSsimC2;
                const double value = (a1 * a2) / (b1 * b2);
                for (std::size_t i = 0; i < per; ++i) {
                    const double dvalue = value * (2.0 * s.mu_b / (m * a1) + 2.0 * (bc[i] - s.mu_b) / (m * a2) -
                                                   2.0 * s.mu_a / (m * b1) - 2.0 * (ac[i] - s.mu_a) / (m * b2));
                    g[c * per + i] = -dvalue / static_cast<double>(channels);
                }
            }
            break;
        }
    }
    return g;
}

double distance(MetricId metric, const Tensor& a, const Tensor& b) {
    check_shapes(a, b);
    return distance(metric, a.to_doubles(), b.to_doubles(), channels_of(a));
}

Tensor distance_gradient(MetricId metric, const Tensor& a, const Tensor& b) {
    check_shapes(a, b);
    return Tensor::from_doubles(a.shape(), distance_gradient(metric, a.to_doubles(), b.to_doubles(), channels_of(a)));
}

}  // namespace belong
