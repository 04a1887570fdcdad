#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belong/metrics.hpp"
#include "belong/model.hpp"

namespace belong {

/// Budget for gradient-based input reverse-engineering.
/// The optimizer is Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct InversionConfig {
    std::size_t restarts = 8;
    std::size_t steps_per_restart = 400;
    double learning_rate = 0.05;
    double early_stop_loss = 1e-7;
    std::uint64_t seed = 0;

    void validate() const;
    /// Stable text form used for cache keys.
    std::string canonical() const;
};

struct RestartTrace {
    std::optional<std::size_t> class_index;
    std::size_t restart = 0;
    std::size_t steps = 0;
    bool abandoned = false;
    double loss = 0.0;  // meaningless when abandoned
};

struct InversionResult {
    ModelInput best_input;
    double best_loss = 0.0;
    std::vector<double> per_restart_losses;  // surviving restarts, in run order
    std::vector<RestartTrace> trace;
    std::size_t steps_used = 0;
    std::size_t abandoned_restarts = 0;
    double wall_time_ms = 0.0;
};

/// Minimizes metric(forward(m, i), x) over the input i with restarted Adam.
///
/// Each restart draws its starting latent from Rng::derive(cfg.seed, job) and
/// keeps its best iterate. Class-conditional models run every restart once
/// per class. A restart that hits a non-finite loss is dropped; if all are
/// dropped a NumericError is thrown. Losses in the result are re-evaluated
/// through forward() on the float-rounded input.
InversionResult reverse_engineer(const GenerativeModel& m, const Tensor& x, MetricId metric,
                                 const InversionConfig& cfg);

/// Global minimum over every codebook entry of a grid model.
InversionResult exhaustive_invert(const GenerativeModel& m, const Tensor& x, MetricId metric);

/// exhaustive_invert for grid models, reverse_engineer otherwise.
InversionResult reconstruction_loss(const GenerativeModel& m, const Tensor& x, MetricId metric,
                                    const InversionConfig& cfg);

}  // namespace belong
