#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: densities are integrated with adaptive Simpson quadrature and
// quantiles are found by plain bisection.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double t_density(double t, double nu) {
    const double logc = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(logc - (nu + 1) / 2 * std::log1p(t * t / nu));
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6 * (fa + 4 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                       double whole, double eps, int depth) {
    const double m = (a + b) / 2;
    const double lm = (a + m) / 2, rm = (m + b) / 2;
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
    return adaptive(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
    return detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(f, a, b, fa, fm, fb), eps, 50);
}

inline double t_cdf(double t, double nu) {
    const double half = integrate([nu](double x) { return t_density(x, nu); }, 0.0, std::abs(t));
    return t >= 0 ? 0.5 + half : 0.5 - half;
}

inline double t_quantile(double p, double nu) {
    double lo = -1.0, hi = 1.0;
    while (t_cdf(lo, nu) > p) lo *= 2;
    while (t_cdf(hi, nu) < p) hi *= 2;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = (lo + hi) / 2;
        (t_cdf(mid, nu) < p ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

inline double grubbs(std::size_t n, double alpha) {
    const double nn = static_cast<double>(n);
    const double t = t_quantile(1 - alpha / nn, nn - 2);
    return (nn - 1) / std::sqrt(nn) * std::sqrt(t * t / (nn - 2 + t * t));
}

}  // namespace oracle
