#pragma once

#include <cstddef>
#include <string>

#include "belong/metrics.hpp"

namespace belong {

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double x, double a, double b);

/// Student-t density, CDF and quantile with nu >= 1 degrees of freedom.
double t_pdf(double t, double nu);
double t_cdf(double t, double nu);
/// t with t_cdf(t, nu) == p, solved to |t_cdf - p| < 1e-10.
double t_quantile(double p, double nu);

/// One-sided Grubbs critical value for n samples at significance alpha,
/// using the t quantile at 1 - alpha/n with n - 2 degrees of freedom.
double grubbs_threshold(std::size_t n, double alpha);

enum class Decision { belonging, non_belonging };

std::string to_string(Decision d);

/// Calibrated-loss statistics of N generated images of a model.
struct BelongingDistribution {
    std::string model_id;
    std::string reference_id;
    MetricId metric = MetricId::mse;
    std::size_t n = 0;
    double mu = 0.0;
    double sigma = 0.0;  // sample standard deviation (divisor n - 1)
    double alpha = 0.05;
    std::string inversion_config_hash;
    bool calibrated = true;

    void validate() const;
    bool operator==(const BelongingDistribution&) const = default;
};

struct GrubbsOutcome {
    Decision decision = Decision::non_belonging;
    double z = 0.0;
    double threshold = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    std::size_t n = 0;
    double alpha = 0.0;
};

/// H0 (non-belonging) is rejected when (loss - mu) / sigma < G(n, alpha).
/// Low losses always count as belonging.
GrubbsOutcome grubbs_decide(double calibrated_loss, const BelongingDistribution& dist);
GrubbsOutcome grubbs_decide(double calibrated_loss, double mu, double sigma, std::size_t n, double alpha);

}  // namespace belong
