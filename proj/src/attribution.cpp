#include "belong/attribution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "belong/error.hpp"
#include "belong/parallel.hpp"
#include "belong/serialize.hpp"

namespace belong {

namespace fs = std::filesystem;

double calibrate(double raw, double reference) { return raw / std::max(reference, kReferenceFloor); }

std::string AttributionConfig::hash() const {
    std::ostringstream os;
    os.precision(17);
    os << inversion.canonical() << ";metric=" << to_string(metric) << ";alpha=" << alpha << ";n=" << samples
       << ";sample_seed=" << sample_seed << ";calibrated=" << calibrated;
    const std::string text = os.str();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_string(DecisionRule r) { return r == DecisionRule::grubbs ? "grubbs" : "exact"; }

namespace {

void check_pair(const GenerativeModel& m, const GenerativeModel& m_ref) {
    if (m.image_shape() != m_ref.image_shape()) {
        throw ShapeError("target model '" + m.id() + "' (" + to_string(m.image_shape()) + ") and reference model '" +
                         m_ref.id() + "' (" + to_string(m_ref.image_shape()) + ") produce different image shapes");
    }
}

AttributionVerdict make_verdict(const GenerativeModel& m, const GenerativeModel& m_ref, const ProbeLoss& loss,
                                const AttributionConfig& cfg, const std::string& examined_id) {
    AttributionVerdict v;
    v.examined_id = examined_id;
    v.model_id = m.id();
    v.reference_id = m_ref.id();
    v.raw_loss = loss.raw;
    v.reference_loss = loss.reference;
    v.calibrated_loss = loss.calibrated;
    v.metric = cfg.metric;
    v.inversion = cfg.inversion;
    v.alpha = cfg.alpha;
    return v;
}

}  // namespace

ProbeLoss probe_loss(const GenerativeModel& m, const GenerativeModel& m_ref, const Tensor& x,
                     const AttributionConfig& cfg) {
    ProbeLoss out;
    out.target_inversion = reconstruction_loss(m, x, cfg.metric, cfg.inversion);
    out.raw = out.target_inversion.best_loss;
    if (cfg.calibrated) {
        out.reference = reconstruction_loss(m_ref, x, cfg.metric, cfg.inversion).best_loss;
        out.calibrated = calibrate(out.raw, *out.reference);
    } else {
        out.calibrated = out.raw;
    }
    return out;
}

std::vector<ProbeLoss> belonging_losses(const GenerativeModel& m, const GenerativeModel& m_ref,
                                        const AttributionConfig& cfg, Rng& rng) {
    check_pair(m, m_ref);
    const auto inputs = sample_inputs(m, cfg.samples, rng);
    std::vector<ProbeLoss> losses(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) { losses[i] = probe_loss(m, m_ref, m.forward(inputs[i]), cfg); });
    return losses;
}

BelongingDistribution estimate_belonging_distribution(const GenerativeModel& m, const GenerativeModel& m_ref,
                                                      const AttributionConfig& cfg, Rng& rng) {
    if (cfg.samples < 3) throw DegenerateError("belonging distribution needs N >= 3 samples");
    const std::uint64_t seed = rng.seed();
    const auto losses = belonging_losses(m, m_ref, cfg, rng);

    double sum = 0.0;
    for (const auto& l : losses) sum += l.calibrated;
    const double n = static_cast<double>(losses.size());
    const double mu = sum / n;
    double ss = 0.0;
    for (const auto& l : losses) ss += (l.calibrated - mu) * (l.calibrated - mu);
    const double sigma = std::sqrt(ss / (n - 1.0));
    if (!(sigma > 0.0)) {
        throw DegenerateError("belonging losses of model '" + m.id() +
                              "' are all identical (sigma = 0); Grubbs' test is undefined. Use a larger N or "
                              "a different metric, or the exact zero-loss rule for enumerable models");
    }

    BelongingDistribution d;
    d.model_id = m.id();
    d.reference_id = m_ref.id();
    d.metric = cfg.metric;
    d.n = losses.size();
    d.mu = mu;
    d.sigma = sigma;
    d.alpha = cfg.alpha;
    AttributionConfig keyed = cfg;
    keyed.sample_seed = seed;
    d.inversion_config_hash = keyed.hash();
    d.calibrated = cfg.calibrated;
    return d;
}

std::string distribution_cache_path(const std::string& cache_dir, const std::string& model_id,
                                    const std::string& reference_id, const AttributionConfig& cfg) {
    return (fs::path(cache_dir) / model_id / reference_id / (to_string(cfg.metric) + "-" + cfg.hash() + ".json"))
        .string();
}

void save_distribution(const BelongingDistribution& dist, const std::string& path) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    // Unique temp name per writer; rename makes the last writer win atomically.
    std::ostringstream tmp_name;
    tmp_name << target.filename().string() << ".tmp." << std::chrono::steady_clock::now().time_since_epoch().count();
    const fs::path tmp = target.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write " + tmp.string());
        out << nlohmann::json(dist).dump(2) << '\n';
    }
    fs::rename(tmp, target);
}

BelongingDistribution load_distribution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path);
    try {
        return nlohmann::json::parse(in).get<BelongingDistribution>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

BelongingDistribution load_or_estimate_distribution(const std::string& cache_dir, const GenerativeModel& m,
                                                    const GenerativeModel& m_ref, const AttributionConfig& cfg) {
    const std::string path = distribution_cache_path(cache_dir, m.id(), m_ref.id(), cfg);
    if (fs::exists(path)) return load_distribution(path);
    Rng rng(cfg.sample_seed);
    auto dist = estimate_belonging_distribution(m, m_ref, cfg, rng);
    save_distribution(dist, path);
    return dist;
}

AttributionVerdict attribute(const GenerativeModel& m, const GenerativeModel& m_ref, const BelongingDistribution& dist,
                             const Tensor& x, const AttributionConfig& cfg, const std::string& examined_id) {
    const auto start = std::chrono::steady_clock::now();
    check_pair(m, m_ref);
    if (dist.model_id != m.id() || dist.reference_id != m_ref.id()) {
        throw ConfigMismatchError("belonging distribution was built for model '" + dist.model_id + "' / reference '" +
                                  dist.reference_id + "', not '" + m.id() + "' / '" + m_ref.id() + "'");
    }
    if (dist.metric != cfg.metric) {
        throw ConfigMismatchError("belonging distribution uses metric " + to_string(dist.metric) + ", requested " +
                                  to_string(cfg.metric));
    }
    if (dist.inversion_config_hash != cfg.hash() || dist.calibrated != cfg.calibrated) {
        throw ConfigMismatchError("belonging distribution config hash " + dist.inversion_config_hash +
                                  " does not match the current settings (" + cfg.hash() +
                                  "); re-estimate the distribution");
    }
    dist.validate();

    const ProbeLoss loss = probe_loss(m, m_ref, x, cfg);
    AttributionVerdict v = make_verdict(m, m_ref, loss, cfg, examined_id);
    v.rule = DecisionRule::grubbs;
    v.grubbs = grubbs_decide(loss.calibrated, dist);
    v.decision = v.grubbs->decision;
    v.alpha = dist.alpha;
    v.n = dist.n;
    v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

AttributionVerdict attribute_exact(const GenerativeModel& m, const GenerativeModel& m_ref, const Tensor& x,
                                   const AttributionConfig& cfg, const std::string& examined_id) {
    const auto start = std::chrono::steady_clock::now();
    check_pair(m, m_ref);
    if (m.architecture() != Architecture::grid) {
        throw UnsupportedError("the exact zero-loss rule needs an enumerable (grid) model");
    }
    const ProbeLoss loss = probe_loss(m, m_ref, x, cfg);
    AttributionVerdict v = make_verdict(m, m_ref, loss, cfg, examined_id);
    v.rule = DecisionRule::exact;
    v.decision = loss.raw <= kExactZeroTolerance ? Decision::belonging : Decision::non_belonging;
    v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

}  // namespace belong
