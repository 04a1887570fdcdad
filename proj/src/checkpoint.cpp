#include <filesystem>
#include <fstream>

#include "belong/error.hpp"
#include "belong/model.hpp"
#include "json.hpp"

namespace belong {

namespace fs = std::filesystem;
using nlohmann::json;

void save_model(const GenerativeModel& m, const std::string& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["model_id"] = m.id();
    manifest["architecture"] = to_string(m.architecture());
    manifest["d_z"] = m.latent_dim();
    const auto& s = m.image_shape();
    manifest["image_shape"] = {s.channels, s.height, s.width};
    manifest["num_classes"] = m.num_classes() ? json(*m.num_classes()) : json(nullptr);
    manifest["output_activation"] = to_string(m.spec().output_activation);
    json params = json::array();
    for (const auto& p : m.parameters()) params.push_back({{"name", p.name}, {"shape", p.value.shape()}});
    manifest["parameters"] = params;
    const auto& meta = m.meta();
    manifest["training_meta"] = {{"dataset_id", meta.dataset_id},     {"seed", meta.seed},
                                 {"epochs", meta.epochs},             {"learning_rate", meta.learning_rate},
                                 {"initial_loss", meta.initial_loss}, {"final_loss", meta.final_loss}};

    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw Error("cannot write manifest in " + dir);
    mf << manifest.dump(2) << '\n';

    std::ofstream wf(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!wf) throw Error("cannot write weights in " + dir);
    for (const auto& p : m.parameters()) write_tensor(p.value, wf);
}

GenerativeModel load_model(const std::string& dir) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    const fs::path weights_path = fs::path(dir) / "weights.bin";
    std::ifstream mf(manifest_path);
    if (!mf) throw MissingArtifactError(manifest_path.string());
    std::ifstream wf(weights_path, std::ios::binary);
    if (!wf) throw MissingArtifactError(weights_path.string());

    json manifest;
    try {
        manifest = json::parse(mf);
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    try {
        ModelSpec spec;
        spec.model_id = manifest.at("model_id").get<std::string>();
        spec.architecture = parse_architecture(manifest.at("architecture").get<std::string>());
        spec.latent_dim = manifest.at("d_z").get<std::size_t>();
        const auto shape = manifest.at("image_shape").get<std::vector<std::size_t>>();
        if (shape.size() != 3) throw FormatError("image_shape must have 3 entries");
        spec.image_shape = {shape[0], shape[1], shape[2]};
        if (!manifest.at("num_classes").is_null()) spec.num_classes = manifest["num_classes"].get<std::size_t>();
        spec.output_activation = parse_output_activation(manifest.value("output_activation", "sigmoid"));

        std::vector<NamedTensor> params;
        for (const auto& entry : manifest.at("parameters")) {
            Tensor t = read_tensor(wf);
            const auto expected = entry.at("shape").get<Shape>();
            if (t.shape() != expected) {
                throw FormatError("weights.bin tensor '" + entry.at("name").get<std::string>() + "' has shape " +
                                  shape_to_string(t.shape()) + ", manifest says " + shape_to_string(expected));
            }
            params.push_back({entry.at("name").get<std::string>(), std::move(t)});
        }

        TrainingMeta meta;
        const auto& tm = manifest.at("training_meta");
        meta.dataset_id = tm.at("dataset_id").get<std::string>();
        meta.seed = tm.at("seed").get<std::uint64_t>();
        meta.epochs = tm.at("epochs").get<std::size_t>();
        meta.learning_rate = tm.at("learning_rate").get<double>();
        meta.initial_loss = tm.value("initial_loss", 0.0);
        meta.final_loss = tm.value("final_loss", 0.0);
        return GenerativeModel(std::move(spec), std::move(params), std::move(meta));
    } catch (const json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
}

}  // namespace belong
