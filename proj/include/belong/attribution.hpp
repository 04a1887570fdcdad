#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belong/inversion.hpp"
#include "belong/metrics.hpp"
#include "belong/model.hpp"
#include "belong/stats.hpp"

namespace belong {

/// Division floor for the reference loss.
inline constexpr double kReferenceFloor = 1e-9;

/// raw / max(reference, kReferenceFloor).
double calibrate(double raw, double reference);

struct AttributionConfig {
    MetricId metric = MetricId::mse;
    InversionConfig inversion;
    double alpha = 0.05;
    std::size_t samples = 100;      // N generated belongings
    std::uint64_t sample_seed = 1;  // seeds the belonging-input draw
    bool calibrated = true;         // false divides by nothing (ablation)

    /// 16 hex digits identifying every setting that changes (mu, sigma).
    std::string hash() const;
};

enum class DecisionRule { grubbs, exact };

std::string to_string(DecisionRule r);

struct AttributionVerdict {
    std::string examined_id;
    std::string model_id;
    std::string reference_id;
    double raw_loss = 0.0;
    std::optional<double> reference_loss;  // absent when calibration is off
    double calibrated_loss = 0.0;
    DecisionRule rule = DecisionRule::grubbs;
    std::optional<GrubbsOutcome> grubbs;  // absent under the exact rule
    Decision decision = Decision::non_belonging;
    MetricId metric = MetricId::mse;
    InversionConfig inversion;
    double alpha = 0.0;
    std::size_t n = 0;
    double wall_time_ms = 0.0;
};

/// Losses of one examined image under the target and reference models.
struct ProbeLoss {
    double raw = 0.0;
    std::optional<double> reference;
    double calibrated = 0.0;
    InversionResult target_inversion;
};

ProbeLoss probe_loss(const GenerativeModel& m, const GenerativeModel& m_ref, const Tensor& x,
                     const AttributionConfig& cfg);

/// Calibrated losses of cfg.samples images generated by m from inputs drawn with rng.
std::vector<ProbeLoss> belonging_losses(const GenerativeModel& m, const GenerativeModel& m_ref,
                                        const AttributionConfig& cfg, Rng& rng);

/// Mean and sample standard deviation of the calibrated belonging losses.
/// Throws DegenerateError when every loss is identical.
BelongingDistribution estimate_belonging_distribution(const GenerativeModel& m, const GenerativeModel& m_ref,
                                                      const AttributionConfig& cfg, Rng& rng);

/// Cache file: <cache_dir>/<model_id>/<reference_id>/<metric>-<hash>.json
std::string distribution_cache_path(const std::string& cache_dir, const std::string& model_id,
                                    const std::string& reference_id, const AttributionConfig& cfg);

/// Reads the cached distribution or estimates it with Rng(cfg.sample_seed) and
/// writes it atomically.
BelongingDistribution load_or_estimate_distribution(const std::string& cache_dir, const GenerativeModel& m,
                                                    const GenerativeModel& m_ref, const AttributionConfig& cfg);

void save_distribution(const BelongingDistribution& dist, const std::string& path);
BelongingDistribution load_distribution(const std::string& path);

/// Calibrated loss of x followed by the Grubbs decision against dist.
/// Refuses to run when dist was built for another model, reference, metric or config.
AttributionVerdict attribute(const GenerativeModel& m, const GenerativeModel& m_ref, const BelongingDistribution& dist,
                             const Tensor& x, const AttributionConfig& cfg, const std::string& examined_id = "");

/// Zero-loss rule for enumerable models with exhaustive inversion:
/// belonging iff the global minimum loss is (numerically) zero.
AttributionVerdict attribute_exact(const GenerativeModel& m, const GenerativeModel& m_ref, const Tensor& x,
                                   const AttributionConfig& cfg, const std::string& examined_id = "");

inline constexpr double kExactZeroTolerance = 1e-12;

}  // namespace belong
