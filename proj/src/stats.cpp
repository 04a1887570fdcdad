#include "belong/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "belong/error.hpp"

namespace belong {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kCfTolerance = 1e-12;
constexpr int kCfMaxIterations = 10000;

// Continued fraction for I_x(a, b), evaluated by the modified Lentz method.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kCfTolerance) return h;
    }
    throw NumericError("incomplete_beta: continued fraction did not converge");
}

void check_nu(double nu) {
    if (!(nu >= 1.0) || !std::isfinite(nu)) throw Error("t distribution needs nu >= 1, got " + std::to_string(nu));
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The fraction converges fast only below the mean; use the symmetry otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double t_pdf(double t, double nu) {
    check_nu(nu);
    const double log_norm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_norm - (nu + 1.0) / 2.0 * std::log1p(t * t / nu));
}

double t_cdf(double t, double nu) {
    check_nu(nu);
    if (std::isnan(t)) throw Error("t_cdf: t is NaN");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * incomplete_beta(nu / (t * t + nu), nu / 2.0, 0.5);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double nu) {
    check_nu(nu);
    if (!(p > 0.0 && p < 1.0)) throw Error("t_quantile: p must lie in (0, 1), got " + std::to_string(p));
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -t_quantile(1.0 - p, nu);

    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, nu) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericError("t_quantile: could not bracket p");
    }
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double f = t_cdf(t, nu) - p;
        if (std::abs(f) < 1e-13) break;
        if (f < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        // Newton step when it stays inside the bracket, bisection otherwise.
        const double newton = t - f / t_pdf(t, nu);
        t = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(t))) break;
    }
    return t;
}

double grubbs_threshold(std::size_t n, double alpha) {
    if (n < 3) throw DegenerateError("Grubbs test needs at least 3 samples, got " + std::to_string(n));
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
    const double nn = static_cast<double>(n);
    const double t = t_quantile(1.0 - alpha / nn, nn - 2.0);
    return (nn - 1.0) / std::sqrt(nn) * std::sqrt(t * t / (nn - 2.0 + t * t));
}

std::string to_string(Decision d) { return d == Decision::belonging ? "belonging" : "non-belonging"; }

void BelongingDistribution::validate() const {
    if (n < 3) throw DegenerateError("belonging distribution needs n >= 3, got " + std::to_string(n));
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DegenerateError("belonging distribution has zero spread (sigma = 0)");
    }
    if (!std::isfinite(mu)) throw DegenerateError("belonging distribution mean is not finite");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
}

GrubbsOutcome grubbs_decide(double calibrated_loss, double mu, double sigma, std::size_t n, double alpha) {
    if (!(sigma > 0.0)) throw DegenerateError("grubbs_decide: sigma must be positive");
    GrubbsOutcome out;
    out.mu = mu;
    out.sigma = sigma;
    out.n = n;
    out.alpha = alpha;
    out.z = (calibrated_loss - mu) / sigma;
    out.threshold = grubbs_threshold(n, alpha);
    out.decision = out.z < out.threshold ? Decision::belonging : Decision::non_belonging;
    return out;
}

GrubbsOutcome grubbs_decide(double calibrated_loss, const BelongingDistribution& dist) {
    dist.validate();
    return grubbs_decide(calibrated_loss, dist.mu, dist.sigma, dist.n, dist.alpha);
}

}  // namespace belong
