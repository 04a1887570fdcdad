#pragma once

#include <optional>
#include <string>
#include <vector>

#include "belong/attribution.hpp"
#include "belong/dataset.hpp"
#include "belong/filter.hpp"
#include "belong/model.hpp"
#include "belong/report.hpp"

namespace belong {

enum class ScenarioKind {
    vs_training_data,
    vs_unseen_data,
    vs_other_architecture,
    vs_other_dataset,
    vs_overlapping_dataset,
    adaptive_filter,
    calibration_ablation,
    metric_ablation,
};

std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& s);
const std::vector<ScenarioKind>& all_scenario_kinds();

/// Where the non-belonging probes come from: images of a dataset, or images
/// generated by another model.
struct ContrastSource {
    enum class Kind { dataset, model } kind = Kind::dataset;
    std::string path;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::vs_training_data;
    std::string target;     // model checkpoint dir
    std::string reference;  // model checkpoint dir
    ContrastSource contrast;
    std::size_t belonging_count = 100;
    std::size_t nonbelonging_count = 100;
    // adaptive_filter only; applied to belonging probes. Unset means warm_tint(channels).
    std::optional<FilterParams> filter;
};

struct HarnessConfig {
    AttributionConfig attribution;
    std::string cache_dir = ".belong-cache";
    std::uint64_t probe_seed = 7;
    bool record_timing = true;
};

struct LoggedVerdict {
    std::string report;
    bool belonging_probe = false;
    AttributionVerdict verdict;
};

struct ScenarioResult {
    std::vector<ConfusionReport> reports;
    std::vector<LoggedVerdict> log;
};

/// Everything a scenario needs, already in memory.
struct ScenarioArtifacts {
    GenerativeModel target;
    GenerativeModel reference;
    std::optional<Dataset> contrast_data;
    std::optional<GenerativeModel> contrast_model;
};

/// Loads the scenario's checkpoints and dataset; a missing one raises
/// MissingArtifactError naming the path.
ScenarioArtifacts load_artifacts(const Scenario& s);

/// Belonging probes are images generated by the target from inputs drawn with
/// the probe seed; contrast probes are drawn from the contrast source. Grid
/// targets use the exact zero-loss rule, all others Grubbs' test against a
/// cached belonging distribution. The ablations produce one report per variant.
ScenarioResult run_scenario(const Scenario& s, const ScenarioArtifacts& artifacts, const HarnessConfig& cfg);
ScenarioResult run_scenario(const Scenario& s, const HarnessConfig& cfg);

/// Counts a report from (is-belonging-probe, decision) pairs.
ConfusionReport tally(const std::string& name, const std::vector<LoggedVerdict>& log, bool record_timing);

void write_verdict_log(const std::vector<LoggedVerdict>& log, const std::string& path);

// Standard artifact zoo used by `build-zoo` and the default scenarios.
struct ZooOptions {
    ImageShape image_shape;
    std::size_t dataset_size = 256;
    std::size_t grid_size = 64;
    std::vector<double> overlap_fractions = {0.5};
    TrainConfig train;  // architecture and id are overridden per model
    std::uint64_t seed = 0;
};

void build_zoo(const std::string& workdir, const ZooOptions& options);

/// Scenario wired to the zoo layout under workdir.
Scenario default_scenario(ScenarioKind kind, const std::string& workdir, double overlap_fraction = 0.5);

namespace zoo {
std::string dataset_dir(const std::string& workdir, const std::string& name);
std::string model_dir(const std::string& workdir, const std::string& name);
}  // namespace zoo

}  // namespace belong
