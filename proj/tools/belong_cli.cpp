// Command-line front end: dataset synthesis, training, belonging
// distributions, attribution, scenarios and reports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "belong/attribution.hpp"
#include "belong/dataset.hpp"
#include "belong/error.hpp"
#include "belong/parallel.hpp"
#include "belong/report.hpp"
#include "belong/scenario.hpp"
#include "belong/serialize.hpp"

namespace fs = std::filesystem;
using namespace belong;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitMissing = 2;
constexpr int kExitFailure = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string metric = "mse";
    double alpha = 0.05;
    std::size_t restarts = 8;
    std::size_t steps = 400;
    double lr = 0.05;
    double early_stop = 1e-7;
    std::uint64_t seed = 0;
    std::size_t samples = 100;
    std::string cache_dir = ".belong-cache";
    std::string out;
    std::size_t threads = 1;
    bool no_timing = false;
    bool no_calibration = false;

    AttributionConfig attribution() const {
        AttributionConfig c;
        c.metric = parse_metric(metric);
        c.alpha = alpha;
        c.inversion.restarts = restarts;
        c.inversion.steps_per_restart = steps;
        c.inversion.learning_rate = lr;
        c.inversion.early_stop_loss = early_stop;
        c.inversion.seed = seed;
        c.samples = samples;
        c.sample_seed = seed + 1;
        c.calibrated = !no_calibration;
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::string require_out(const Globals& g, const char* what) {
    if (g.out.empty()) throw UsageError(std::string(what) + " needs --out");
    return g.out;
}

// ---- export-pgm ----------------------------------------------------------

Tensor pick_image(const Tensor& t, std::size_t index) {
    if (t.rank() == 2) return t.reshaped({1, t.shape()[0], t.shape()[1]});
    if (t.rank() == 3) return t;
    if (t.rank() == 4) {
        if (index >= t.shape()[0]) throw UsageError("--index out of range");
        const std::size_t p = t.shape()[1] * t.shape()[2] * t.shape()[3];
        std::vector<float> px(t.data().begin() + static_cast<std::ptrdiff_t>(index * p),
                              t.data().begin() + static_cast<std::ptrdiff_t>((index + 1) * p));
        return Tensor({t.shape()[1], t.shape()[2], t.shape()[3]}, std::move(px));
    }
    throw UsageError("cannot render a tensor of shape " + shape_to_string(t.shape()) + " as an image");
}

void write_pnm(const std::vector<Tensor>& panels, const std::string& path, std::size_t scale) {
    const Shape& s = panels.front().shape();
    const std::size_t c = s[0], h = s[1], w = s[2];
    if (c != 1 && c != 3) throw UsageError("export-pgm supports 1 or 3 channels");
    for (const auto& p : panels) {
        if (p.shape() != s) throw UsageError("side-by-side images must share a shape");
    }
    const std::size_t gap = 1;
    const std::size_t out_w = panels.size() * w * scale + (panels.size() - 1) * gap;
    const std::size_t out_h = h * scale;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << (c == 1 ? "P5" : "P6") << '\n' << out_w << ' ' << out_h << "\n255\n";
    for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const std::size_t panel = x / (w * scale + gap);
            const std::size_t px = x % (w * scale + gap);
            for (std::size_t ch = 0; ch < c; ++ch) {
                unsigned char v = 255;
                if (px < w * scale) {
                    const float f = panels[panel].data()[ch * h * w + (y / scale) * w + px / scale];
                    v = static_cast<unsigned char>(std::lround(std::clamp(f, 0.0f, 1.0f) * 255.0f));
                }
                out.put(static_cast<char>(v));
            }
        }
    }
}

// ---- helpers --------------------------------------------------------------

Tensor load_image(const std::string& path, std::size_t index) { return pick_image(load_tensor(path), index); }

Tensor stack_images(const std::vector<Tensor>& images) {
    const Shape& s = images.front().shape();
    std::vector<float> all;
    all.reserve(images.size() * images.front().size());
    for (const auto& im : images) all.insert(all.end(), im.data().begin(), im.data().end());
    return Tensor({images.size(), s[0], s[1], s[2]}, std::move(all));
}

BelongingDistribution distribution_for(const Globals& g, const GenerativeModel& m, const GenerativeModel& ref) {
    const auto cfg = g.attribution();
    if (g.cache_dir.empty()) {
        Rng rng(cfg.sample_seed);
        return estimate_belonging_distribution(m, ref, cfg, rng);
    }
    return load_or_estimate_distribution(g.cache_dir, m, ref, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Origin attribution of generated images by input reverse-engineering"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--metric", g.metric, "Reconstruction metric")
        ->check(CLI::IsMember({"mse", "mae", "ssim"}))
        ->capture_default_str();
    app.add_option("--alpha", g.alpha, "Significance level")->capture_default_str();
    app.add_option("--restarts", g.restarts, "Random restarts per inversion")->capture_default_str();
    app.add_option("--steps", g.steps, "Adam steps per restart")->capture_default_str();
    app.add_option("--lr", g.lr, "Inversion learning rate")->capture_default_str();
    app.add_option("--early-stop", g.early_stop, "Stop a restart once the loss falls below this")->capture_default_str();
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--samples", g.samples, "Generated belongings N for the distribution")->capture_default_str();
    app.add_option("--cache-dir", g.cache_dir, "Belonging-distribution cache (empty disables)")->capture_default_str();
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--threads", g.threads, "Worker threads")->capture_default_str();
    app.add_flag("--no-timing", g.no_timing, "Write zero for all wall-clock fields");
    app.add_flag("--no-calibration", g.no_calibration, "Use raw reconstruction losses");

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "Generate a synthetic image dataset");
    DatasetSpec ds_spec;
    std::string ds_kind = "gaussian-blobs";
    std::string overlap_with;
    double overlap_fraction = 0.5;
    std::size_t size = 8;
    synth->add_option("--kind", ds_kind, "gaussian-blobs | striped-patterns | mixed")->capture_default_str();
    synth->add_option("--channels", ds_spec.image_shape.channels)->capture_default_str();
    synth->add_option("--size", size, "Image height and width")->capture_default_str();
    synth->add_option("--classes", ds_spec.classes)->capture_default_str();
    synth->add_option("--count", ds_spec.count)->capture_default_str();
    synth->add_option("--noise", ds_spec.noise)->capture_default_str();
    synth->add_option("--id", ds_spec.id);
    synth->add_option("--overlap-with", overlap_with, "Share images with this dataset directory");
    synth->add_option("--overlap-fraction", overlap_fraction)->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Train a generator on a dataset");
    TrainConfig tc;
    std::string data_dir, arch = "mlp", activation = "sigmoid";
    bool conditional = false;
    train->add_option("--data", data_dir, "Dataset directory")->required();
    train->add_option("--arch", arch, "grid | linear | mlp")->capture_default_str();
    train->add_option("--latent-dim", tc.latent_dim)->capture_default_str();
    train->add_option("--hidden", tc.hidden, "Hidden layer sizes (mlp)");
    train->add_option("--epochs", tc.epochs)->capture_default_str();
    train->add_option("--train-lr", tc.learning_rate)->capture_default_str();
    train->add_option("--batch", tc.batch_size)->capture_default_str();
    train->add_option("--activation", activation, "sigmoid | identity")->capture_default_str();
    train->add_flag("--conditional", conditional, "Condition on dataset labels");
    train->add_option("--id", tc.model_id);

    // belonging-dist
    auto* bdist = app.add_subcommand("belonging-dist", "Estimate (or load) a model's belonging distribution");
    std::string model_dir, ref_dir;
    bdist->add_option("--model", model_dir)->required();
    bdist->add_option("--reference", ref_dir)->required();

    // invert
    auto* invert = app.add_subcommand("invert", "Reverse-engineer the input of one image");
    std::string image_path;
    std::string save_recon;
    std::size_t image_index = 0;
    invert->add_option("image", image_path, "RNTZ image tensor")->required();
    invert->add_option("--index", image_index, "Image index inside a [N,C,H,W] tensor")->capture_default_str();
    invert->add_option("--model", model_dir)->required();
    invert->add_option("--save-reconstruction", save_recon, "Write the reconstructed image (RNTZ)");

    // generate
    auto* gen = app.add_subcommand("generate", "Sample images from a model into one [N,C,H,W] tensor");
    std::size_t gen_count = 16;
    gen->add_option("--model", model_dir)->required();
    gen->add_option("--count", gen_count)->capture_default_str();

    // attribute
    auto* attr = app.add_subcommand("attribute", "Decide whether an image belongs to a model");
    std::string examined_id;
    attr->add_option("image", image_path, "RNTZ image tensor")->required();
    attr->add_option("--index", image_index, "Image index inside a [N,C,H,W] tensor")->capture_default_str();
    attr->add_option("--model", model_dir)->required();
    attr->add_option("--reference", ref_dir)->required();
    attr->add_option("--id", examined_id, "Examined-image id (defaults to the file name)");

    // run-scenario
    auto* scen = app.add_subcommand("run-scenario", "Run an evaluation scenario");
    std::string scenario_name, workdir = "zoo", contrast_data, contrast_model;
    std::size_t n_belonging = 100, n_non = 100;
    double overlap = 0.5;
    std::vector<double> filter_gain, filter_bias;
    double filter_gamma = 0.0;
    scen->add_option("name", scenario_name)->required();
    scen->add_option("--workdir", workdir, "Zoo directory")->capture_default_str();
    scen->add_option("--model", model_dir, "Override target model");
    scen->add_option("--reference", ref_dir, "Override reference model");
    auto* cd = scen->add_option("--contrast-data", contrast_data, "Override contrast dataset");
    auto* cm = scen->add_option("--contrast-model", contrast_model, "Override contrast model");
    cd->excludes(cm);
    scen->add_option("--belonging", n_belonging, "Belonging probes")->capture_default_str();
    scen->add_option("--non-belonging", n_non, "Non-belonging probes")->capture_default_str();
    scen->add_option("--overlap", overlap, "Overlap fraction for vs_overlapping_dataset")->capture_default_str();
    scen->add_option("--filter-gain", filter_gain, "Per-channel filter gains");
    scen->add_option("--filter-bias", filter_bias, "Per-channel filter biases");
    scen->add_option("--filter-gamma", filter_gamma, "Filter gamma");

    // report
    auto* report = app.add_subcommand("report", "Merge scenario reports into one table");
    std::vector<std::string> report_inputs;
    std::string format = "csv";
    report->add_option("inputs", report_inputs, "report.json files")->required();
    report->add_option("--format", format, "csv | json")->capture_default_str();

    // export-pgm
    auto* pgm = app.add_subcommand("export-pgm", "Render tensors as a binary PGM/PPM");
    std::vector<std::string> pgm_inputs;
    std::size_t pgm_index = 0, pgm_scale = 8;
    pgm->add_option("tensors", pgm_inputs, "One or more RNTZ tensors, placed side by side")->required();
    pgm->add_option("--index", pgm_index, "Image index inside a [N,C,H,W] tensor")->capture_default_str();
    pgm->add_option("--scale", pgm_scale, "Pixel magnification")->capture_default_str();

    // build-zoo
    auto* zoo_cmd = app.add_subcommand("build-zoo", "Create the standard datasets and models");
    ZooOptions zoo_opts;
    std::size_t zoo_channels = 1;
    zoo_cmd->add_option("--workdir", workdir)->capture_default_str();
    zoo_cmd->add_option("--channels", zoo_channels)->capture_default_str();
    zoo_cmd->add_option("--overlap-fractions", zoo_opts.overlap_fractions);
    zoo_cmd->add_option("--dataset-size", zoo_opts.dataset_size)->capture_default_str();
    zoo_cmd->add_option("--epochs", zoo_opts.train.epochs)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        set_thread_count(g.threads);
        if (*synth) {
            ds_spec.kind = parse_dataset_kind(ds_kind);
            ds_spec.image_shape.height = ds_spec.image_shape.width = size;
            ds_spec.seed = g.seed;
            const std::string out = require_out(g, "synth-data");
            Dataset ds = overlap_with.empty() ? synth_dataset(ds_spec)
                                              : overlap_dataset(load_dataset(overlap_with), overlap_fraction, ds_spec);
            save_dataset(ds, out);
            std::cout << json{{"dataset", ds.id}, {"count", ds.items.size()}, {"path", out}}.dump() << '\n';
        } else if (*train) {
            const std::string out = require_out(g, "train");
            const Dataset ds = load_dataset(data_dir);
            tc.architecture = parse_architecture(arch);
            tc.output_activation = parse_output_activation(activation);
            if (conditional) tc.num_classes = ds.spec.classes;
            if (tc.model_id.empty()) tc.model_id = arch + "-" + ds.id + "-s" + std::to_string(g.seed);
            Rng rng(g.seed);
            const GenerativeModel m = train_decoder(tc, ds.items, ds.id, rng);
            save_model(m, out);
            std::cout << json{{"model", m.id()},
                              {"initial_loss", m.meta().initial_loss},
                              {"final_loss", m.meta().final_loss},
                              {"path", out}}
                             .dump()
                      << '\n';
        } else if (*bdist) {
            const auto m = load_model(model_dir);
            const auto ref = load_model(ref_dir);
            const auto dist = distribution_for(g, m, ref);
            write_text(g.out, json(dist).dump(2) + "\n");
        } else if (*invert) {
            const auto m = load_model(model_dir);
            const auto cfg = g.attribution();
            auto result = reconstruction_loss(m, load_image(image_path, image_index), cfg.metric, cfg.inversion);
            if (g.no_timing) result.wall_time_ms = 0.0;
            if (!save_recon.empty()) save_tensor(m.forward(result.best_input), save_recon);
            write_text(g.out, json(result).dump() + "\n");
        } else if (*gen) {
            const std::string out = require_out(g, "generate");
            const auto m = load_model(model_dir);
            Rng rng(g.seed);
            std::vector<Tensor> images;
            for (const auto& in : sample_inputs(m, gen_count, rng)) images.push_back(m.forward(in));
            save_tensor(stack_images(images), out);
        } else if (*attr) {
            const auto m = load_model(model_dir);
            const auto ref = load_model(ref_dir);
            const Tensor x = load_image(image_path, image_index);
            const std::string id = examined_id.empty()
                                       ? fs::path(image_path).filename().string() + "#" + std::to_string(image_index)
                                       : examined_id;
            const auto cfg = g.attribution();
            AttributionVerdict v = m.architecture() == Architecture::grid
                                       ? attribute_exact(m, ref, x, cfg, id)
                                       : attribute(m, ref, distribution_for(g, m, ref), x, cfg, id);
            if (g.no_timing) v.wall_time_ms = 0.0;
            write_text(g.out, json(v).dump() + "\n");
        } else if (*scen) {
            const auto kind = parse_scenario_kind(scenario_name);
            Scenario s = default_scenario(kind, workdir, overlap);
            if (!model_dir.empty()) s.target = model_dir;
            if (!ref_dir.empty()) s.reference = ref_dir;
            if (!contrast_data.empty()) s.contrast = {ContrastSource::Kind::dataset, contrast_data};
            if (!contrast_model.empty()) s.contrast = {ContrastSource::Kind::model, contrast_model};
            s.belonging_count = n_belonging;
            s.nonbelonging_count = n_non;
            if (!filter_gain.empty() || !filter_bias.empty() || filter_gamma > 0.0) {
                FilterParams f;
                if (!filter_gain.empty()) f.gain = filter_gain;
                if (!filter_bias.empty()) f.bias = filter_bias;
                if (filter_gamma > 0.0) f.gamma = filter_gamma;
                s.filter = f;
            }
            HarnessConfig hc;
            hc.attribution = g.attribution();
            hc.cache_dir = g.cache_dir;
            hc.probe_seed = g.seed + 7;
            hc.record_timing = !g.no_timing;
            const std::string out = g.out.empty() ? "results/" + scenario_name : g.out;
            const auto result = run_scenario(s, hc);
            emit_report(result.reports, ReportFormat::json, (fs::path(out) / "report.json").string());
            emit_report(result.reports, ReportFormat::csv, (fs::path(out) / "report.csv").string());
            write_verdict_log(result.log, (fs::path(out) / "verdicts.jsonl").string());
            std::cout << render_csv(result.reports);
        } else if (*report) {
            std::vector<ConfusionReport> all;
            for (const auto& path : report_inputs) {
                std::ifstream in(path);
                if (!in) throw MissingArtifactError(path);
                const auto parsed = parse_reports(json::parse(in));
                all.insert(all.end(), parsed.begin(), parsed.end());
            }
            const auto fmt = parse_report_format(format);
            if (g.out.empty()) {
                if (all.empty()) throw Error("report: no reports to write");
                std::cout << (fmt == ReportFormat::csv ? render_csv(all) : render_json(all).dump(2) + "\n");
            } else {
                emit_report(all, fmt, g.out);
            }
        } else if (*pgm) {
            const std::string out = require_out(g, "export-pgm");
            std::vector<Tensor> panels;
            for (const auto& path : pgm_inputs) panels.push_back(pick_image(load_tensor(path), pgm_index));
            write_pnm(panels, out, std::max<std::size_t>(1, pgm_scale));
        } else if (*zoo_cmd) {
            zoo_opts.image_shape.channels = zoo_channels;
            zoo_opts.seed = g.seed;
            build_zoo(workdir, zoo_opts);
            std::cout << json{{"workdir", workdir}}.dump() << '\n';
        }
    } catch (const MissingArtifactError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMissing;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
