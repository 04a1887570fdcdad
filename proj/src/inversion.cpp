#include "belong/inversion.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "belong/adam.hpp"
#include "belong/error.hpp"
#include "belong/parallel.hpp"

namespace belong {

void InversionConfig::validate() const {
    if (restarts == 0) throw Error("inversion: restarts must be at least 1");
    if (steps_per_restart == 0) throw Error("inversion: steps must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error("inversion: learning rate must be > 0");
    if (!(early_stop_loss >= 0.0)) throw Error("inversion: early-stop loss must be >= 0");
}

std::string InversionConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "restarts=" << restarts << ";steps=" << steps_per_restart << ";lr=" << learning_rate
       << ";early_stop=" << early_stop_loss << ";seed=" << seed << ";adam=0.9,0.999,1e-8";
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_target(const GenerativeModel& m, const Tensor& x) {
    if (x.shape() != m.image_shape().shape()) {
        throw ShapeError("examined image shape " + shape_to_string(x.shape()) + " does not match model image shape " +
                         shape_to_string(m.image_shape().shape()));
    }
}

struct RestartOutcome {
    std::vector<double> best_latent;
    std::size_t steps = 0;
    bool abandoned = false;
};

RestartOutcome run_restart(const GenerativeModel& m, std::span<const double> target, MetricId metric,
                           std::optional<std::size_t> cls, const InversionConfig& cfg, Rng rng) {
    const std::size_t channels = m.image_shape().channels;
    std::vector<double> z(m.latent_dim());
    for (auto& v : z) v = rng.normal();

    RestartOutcome out;
    out.best_latent = z;
    double best = std::numeric_limits<double>::infinity();
    Adam adam(z.size(), {cfg.learning_rate, 0.9, 0.999, 1e-8});
    GenerativeModel::Trace trace;

    for (std::size_t step = 0; step <= cfg.steps_per_restart; ++step) {
        m.evaluate(z, cls, trace);
        const double loss = distance(metric, trace.output(), target, channels);
        bool finite = std::isfinite(loss);
        for (double v : z) finite = finite && std::isfinite(v);
        if (!finite) {
            out.abandoned = true;
            return out;
        }
        if (loss < best) {
            best = loss;
            out.best_latent = z;
        }
        if (loss <= cfg.early_stop_loss || step == cfg.steps_per_restart) break;
        const auto upstream = distance_gradient(metric, trace.output(), target, channels);
        const auto grad = m.pullback(trace, upstream);
        adam.step(z, grad);
        out.steps = step + 1;
    }
    return out;
}

ModelInput to_input(std::span<const double> latent, std::optional<std::size_t> cls) {
    return {Tensor::from_doubles({latent.size()}, latent), cls};
}

}  // namespace

InversionResult reverse_engineer(const GenerativeModel& m, const Tensor& x, MetricId metric,
                                 const InversionConfig& cfg) {
    const auto start = Clock::now();
    if (!m.differentiable()) {
        throw UnsupportedError("reverse_engineer: model '" + m.id() + "' is not differentiable; use exhaustive_invert");
    }
    cfg.validate();
    check_target(m, x);

    std::vector<std::optional<std::size_t>> classes;
    if (m.conditional()) {
        for (std::size_t c = 0; c < *m.num_classes(); ++c) classes.emplace_back(c);
    } else {
        classes.emplace_back(std::nullopt);
    }

    const std::size_t jobs = classes.size() * cfg.restarts;
    const auto target = x.to_doubles();
    std::vector<RestartOutcome> outcomes(jobs);
    parallel_for(jobs, [&](std::size_t j) {
        const auto cls = classes[j / cfg.restarts];
        outcomes[j] = run_restart(m, target, metric, cls, cfg, Rng::derive(cfg.seed, j));
    });

    InversionResult result;
    bool found = false;
    for (std::size_t j = 0; j < jobs; ++j) {
        RestartTrace t;
        t.class_index = classes[j / cfg.restarts];
        t.restart = j % cfg.restarts;
        t.steps = outcomes[j].steps;
        t.abandoned = outcomes[j].abandoned;
        result.steps_used += t.steps;
        if (t.abandoned) {
            t.loss = std::numeric_limits<double>::quiet_NaN();
            ++result.abandoned_restarts;
        } else {
            ModelInput input;
            try {
                input = to_input(outcomes[j].best_latent, t.class_index);
                t.loss = distance(metric, m.forward(input), x);
            } catch (const NumericError&) {
                t.abandoned = true;
                ++result.abandoned_restarts;
                result.trace.push_back(t);
                continue;
            }
            result.per_restart_losses.push_back(t.loss);
            if (!found || t.loss < result.best_loss) {
                found = true;
                result.best_loss = t.loss;
                result.best_input = std::move(input);
            }
        }
        result.trace.push_back(t);
    }
    if (!found) throw NumericError("reverse_engineer: every restart produced a non-finite loss");
    result.wall_time_ms = elapsed_ms(start);
    return result;
}

InversionResult exhaustive_invert(const GenerativeModel& m, const Tensor& x, MetricId metric) {
    const auto start = Clock::now();
    if (m.architecture() != Architecture::grid) {
        throw UnsupportedError("exhaustive_invert: model '" + m.id() + "' has no enumerable input space");
    }
    check_target(m, x);
    InversionResult result;
    std::size_t best_k = 0;
    result.best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.codebook_size(); ++k) {
        const double loss = distance(metric, m.codebook_entry(k), x);
        if (loss < result.best_loss) {
            result.best_loss = loss;
            best_k = k;
        }
    }
    result.best_input = {Tensor::vector({static_cast<float>(best_k)}), std::nullopt};
    result.per_restart_losses = {result.best_loss};
    result.trace = {RestartTrace{std::nullopt, 0, m.codebook_size(), false, result.best_loss}};
    result.steps_used = m.codebook_size();
    result.wall_time_ms = elapsed_ms(start);
    return result;
}

InversionResult reconstruction_loss(const GenerativeModel& m, const Tensor& x, MetricId metric,
                                    const InversionConfig& cfg) {
    if (m.architecture() == Architecture::grid) return exhaustive_invert(m, x, metric);
    return reverse_engineer(m, x, metric, cfg);
}

}  // namespace belong
