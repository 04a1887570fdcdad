#include "belong/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "belong/error.hpp"
#include "belong/parallel.hpp"
#include "belong/serialize.hpp"

namespace belong {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<ScenarioKind, std::string>>& kind_names() {
    static const std::vector<std::pair<ScenarioKind, std::string>> names = {
        {ScenarioKind::vs_training_data, "vs_training_data"},
        {ScenarioKind::vs_unseen_data, "vs_unseen_data"},
        {ScenarioKind::vs_other_architecture, "vs_other_architecture"},
        {ScenarioKind::vs_other_dataset, "vs_other_dataset"},
        {ScenarioKind::vs_overlapping_dataset, "vs_overlapping_dataset"},
        {ScenarioKind::adaptive_filter, "adaptive_filter"},
        {ScenarioKind::calibration_ablation, "calibration_ablation"},
        {ScenarioKind::metric_ablation, "metric_ablation"},
    };
    return names;
}

struct Variant {
    std::string name;
    AttributionConfig config;
};

std::vector<Variant> variants_for(const Scenario& s, const AttributionConfig& base) {
    const std::string name = to_string(s.kind);
    if (s.kind == ScenarioKind::calibration_ablation) {
        AttributionConfig with = base, without = base;
        with.calibrated = true;
        without.calibrated = false;
        return {{name + "/with_calibration", with}, {name + "/without_calibration", without}};
    }
    if (s.kind == ScenarioKind::metric_ablation) {
        std::vector<Variant> out;
        for (MetricId m : {MetricId::mae, MetricId::mse, MetricId::ssim}) {
            AttributionConfig c = base;
            c.metric = m;
            out.push_back({name + "/" + to_string(m), c});
        }
        return out;
    }
    return {{name, base}};
}

struct Probe {
    std::string id;
    bool belonging = false;
    Tensor image;
};

std::vector<Probe> build_probes(const Scenario& s, const ScenarioArtifacts& a, std::uint64_t probe_seed) {
    if (s.belonging_count == 0 || s.nonbelonging_count == 0) throw Error("scenario probe counts must be at least 1");
    std::vector<Probe> probes;
    Rng belong_rng = Rng::derive(probe_seed, 1);
    const auto inputs = sample_inputs(a.target, s.belonging_count, belong_rng);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Tensor img = a.target.forward(inputs[i]);
        if (s.kind == ScenarioKind::adaptive_filter) {
            img = apply_filter(img, s.filter.value_or(warm_tint(a.target.image_shape().channels)));
        }
        probes.push_back({"belonging-" + std::to_string(i), true, std::move(img)});
    }

    if (a.contrast_data) {
        const auto& items = a.contrast_data->items;
        if (s.nonbelonging_count > items.size()) {
            throw Error("contrast dataset '" + a.contrast_data->id + "' holds " + std::to_string(items.size()) +
                        " images, scenario asks for " + std::to_string(s.nonbelonging_count));
        }
        Rng pick = Rng::derive(probe_seed, 2);
        std::vector<std::size_t> order(items.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < s.nonbelonging_count; ++i) {
            std::swap(order[i], order[i + pick.index(order.size() - i)]);
            probes.push_back({a.contrast_data->id + "#" + std::to_string(order[i]), false, items[order[i]].image});
        }
    } else if (a.contrast_model) {
        Rng other_rng = Rng::derive(probe_seed, 3);
        const auto other_inputs = sample_inputs(*a.contrast_model, s.nonbelonging_count, other_rng);
        for (std::size_t i = 0; i < other_inputs.size(); ++i) {
            probes.push_back({a.contrast_model->id() + "-" + std::to_string(i), false,
                              a.contrast_model->forward(other_inputs[i])});
        }
    } else {
        throw Error("scenario has no contrast source");
    }
    for (const auto& p : probes) {
        if (p.image.shape() != a.target.image_shape().shape()) {
            throw ShapeError("probe '" + p.id + "' has shape " + shape_to_string(p.image.shape()) +
                             ", target model generates " + to_string(a.target.image_shape()));
        }
    }
    return probes;
}

}  // namespace

std::string to_string(ScenarioKind k) {
    for (const auto& [kind, name] : kind_names()) {
        if (kind == k) return name;
    }
    return "?";
}

ScenarioKind parse_scenario_kind(const std::string& s) {
    for (const auto& [kind, name] : kind_names()) {
        if (name == s) return kind;
    }
    throw Error("unknown scenario '" + s + "'");
}

const std::vector<ScenarioKind>& all_scenario_kinds() {
    static const std::vector<ScenarioKind> kinds = [] {
        std::vector<ScenarioKind> k;
        for (const auto& entry : kind_names()) k.push_back(entry.first);
        return k;
    }();
    return kinds;
}

ScenarioArtifacts load_artifacts(const Scenario& s) {
    ScenarioArtifacts a{load_model(s.target), load_model(s.reference), std::nullopt, std::nullopt};
    if (s.contrast.kind == ContrastSource::Kind::dataset) {
        a.contrast_data = load_dataset(s.contrast.path);
    } else {
        a.contrast_model = load_model(s.contrast.path);
    }
    return a;
}

ConfusionReport tally(const std::string& name, const std::vector<LoggedVerdict>& log, bool record_timing) {
    ConfusionReport r;
    r.scenario = name;
    double total_ms = 0.0;
    for (const auto& entry : log) {
        if (entry.report != name) continue;
        const bool said_belonging = entry.verdict.decision == Decision::belonging;
        if (entry.belonging_probe) {
            said_belonging ? ++r.tp : ++r.fn;
        } else {
            said_belonging ? ++r.fp : ++r.tn;
        }
        total_ms += entry.verdict.wall_time_ms;
    }
    if (record_timing && r.total() > 0) r.mean_ms = total_ms / static_cast<double>(r.total());
    return r;
}

ScenarioResult run_scenario(const Scenario& s, const ScenarioArtifacts& a, const HarnessConfig& cfg) {
    const auto probes = build_probes(s, a, cfg.probe_seed);
    const bool exact = a.target.architecture() == Architecture::grid;

    ScenarioResult result;
    for (const auto& variant : variants_for(s, cfg.attribution)) {
        std::optional<BelongingDistribution> dist;
        if (!exact) {
            if (cfg.cache_dir.empty()) {
                Rng rng(variant.config.sample_seed);
                dist = estimate_belonging_distribution(a.target, a.reference, variant.config, rng);
            } else {
                dist = load_or_estimate_distribution(cfg.cache_dir, a.target, a.reference, variant.config);
            }
        }
        std::vector<AttributionVerdict> verdicts(probes.size());
        parallel_for(probes.size(), [&](std::size_t i) {
            verdicts[i] = exact ? attribute_exact(a.target, a.reference, probes[i].image, variant.config, probes[i].id)
                                : attribute(a.target, a.reference, *dist, probes[i].image, variant.config, probes[i].id);
            if (!cfg.record_timing) verdicts[i].wall_time_ms = 0.0;
        });
        for (std::size_t i = 0; i < probes.size(); ++i) {
            result.log.push_back({variant.name, probes[i].belonging, std::move(verdicts[i])});
        }
        result.reports.push_back(tally(variant.name, result.log, cfg.record_timing));
    }
    return result;
}

ScenarioResult run_scenario(const Scenario& s, const HarnessConfig& cfg) {
    return run_scenario(s, load_artifacts(s), cfg);
}

void write_verdict_log(const std::vector<LoggedVerdict>& log, const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write verdict log " + path);
    for (const auto& entry : log) {
        nlohmann::json j = entry.verdict;
        j["report"] = entry.report;
        j["label"] = entry.belonging_probe ? "belonging" : "non-belonging";
        out << j.dump() << '\n';
    }
}

namespace zoo {

std::string dataset_dir(const std::string& workdir, const std::string& name) {
    return (fs::path(workdir) / "data" / name).string();
}

std::string model_dir(const std::string& workdir, const std::string& name) {
    return (fs::path(workdir) / "models" / name).string();
}

std::string overlap_name(double fraction) { return "overlap" + std::to_string(std::lround(fraction * 100)); }

}  // namespace zoo

void build_zoo(const std::string& workdir, const ZooOptions& o) {
    auto spec = [&](const std::string& id, DatasetKind kind, std::size_t count, std::uint64_t seed) {
        DatasetSpec s;
        s.id = id;
        s.kind = kind;
        s.image_shape = o.image_shape;
        s.count = count;
        s.seed = o.seed + seed;
        return s;
    };
    auto make = [&](const DatasetSpec& s) {
        Dataset ds = synth_dataset(s);
        save_dataset(ds, zoo::dataset_dir(workdir, s.id));
        return ds;
    };
    auto train = [&](const std::string& id, Architecture arch, const Dataset& ds, std::uint64_t seed) {
        TrainConfig tc = o.train;
        tc.model_id = id;
        tc.architecture = arch;
        Rng rng(o.seed + seed);
        save_model(train_decoder(tc, ds.items, ds.id, rng), zoo::model_dir(workdir, id));
    };

    const Dataset blobs = make(spec("blobs-train", DatasetKind::gaussian_blobs, o.dataset_size, 11));
    make(spec("blobs-unseen", DatasetKind::gaussian_blobs, o.dataset_size, 12));
    const Dataset stripes = make(spec("stripes-train", DatasetKind::striped_patterns, o.dataset_size, 21));
    const Dataset mixed = make(spec("mixed-train", DatasetKind::mixed, o.dataset_size, 31));
    const Dataset ref = make(spec("ref-train", DatasetKind::mixed, o.dataset_size, 41));
    const Dataset grid = make(spec("grid-train", DatasetKind::gaussian_blobs, o.grid_size, 13));

    train("mlp-blobs", Architecture::mlp, blobs, 101);
    train("linear-blobs", Architecture::linear, blobs, 102);
    train("mlp-stripes", Architecture::mlp, stripes, 103);
    train("mlp-mixed", Architecture::mlp, mixed, 104);
    train("mlp-ref", Architecture::mlp, ref, 105);
    train("grid-blobs", Architecture::grid, grid, 106);
    for (double f : o.overlap_fractions) {
        const std::string name = zoo::overlap_name(f);
        DatasetSpec fresh = spec("blobs-" + name, DatasetKind::gaussian_blobs, o.dataset_size,
                                 200 + static_cast<std::uint64_t>(std::lround(f * 100)));
        Dataset ds = overlap_dataset(blobs, f, fresh);
        save_dataset(ds, zoo::dataset_dir(workdir, ds.id));
        train("mlp-" + name, Architecture::mlp, ds, 300 + static_cast<std::uint64_t>(std::lround(f * 100)));
    }
}

Scenario default_scenario(ScenarioKind kind, const std::string& workdir, double overlap_fraction) {
    using Kind = ContrastSource::Kind;
    Scenario s;
    s.kind = kind;
    s.target = zoo::model_dir(workdir, "mlp-blobs");
    s.reference = zoo::model_dir(workdir, "mlp-ref");
    s.contrast = {Kind::dataset, zoo::dataset_dir(workdir, "blobs-train")};
    switch (kind) {
        case ScenarioKind::vs_training_data:
        case ScenarioKind::metric_ablation:
        case ScenarioKind::adaptive_filter:
            break;
        case ScenarioKind::vs_unseen_data:
            s.contrast = {Kind::dataset, zoo::dataset_dir(workdir, "blobs-unseen")};
            break;
        case ScenarioKind::vs_other_architecture:
            s.contrast = {Kind::model, zoo::model_dir(workdir, "linear-blobs")};
            break;
        case ScenarioKind::vs_other_dataset:
            s.contrast = {Kind::model, zoo::model_dir(workdir, "mlp-stripes")};
            break;
        case ScenarioKind::vs_overlapping_dataset:
            s.contrast = {Kind::model, zoo::model_dir(workdir, "mlp-" + zoo::overlap_name(overlap_fraction))};
            break;
        case ScenarioKind::calibration_ablation:
            s.target = zoo::model_dir(workdir, "mlp-mixed");
            s.contrast = {Kind::dataset, zoo::dataset_dir(workdir, "mixed-train")};
            break;
    }
    return s;
}

}  // namespace belong
