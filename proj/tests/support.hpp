#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "belong/model.hpp"
#include "belong/rng.hpp"

namespace testing {

inline std::vector<float> uniform_values(belong::Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

inline belong::Tensor random_tensor(belong::Rng& rng, belong::Shape shape, double lo = 0.0, double hi = 1.0) {
    const std::size_t n = belong::shape_size(shape);
    return belong::Tensor(std::move(shape), uniform_values(rng, n, lo, hi));
}

// Decoder with random weights; sizes run latent (+classes) -> hidden... -> pixels.
inline belong::GenerativeModel random_decoder(belong::Rng& rng, belong::Architecture arch, std::size_t latent_dim,
                                              belong::ImageShape shape, std::vector<std::size_t> hidden = {},
                                              std::optional<std::size_t> classes = std::nullopt,
                                              belong::OutputActivation act = belong::OutputActivation::sigmoid,
                                              std::string id = "") {
    belong::ModelSpec spec;
    spec.model_id = id.empty() ? "random-" + belong::to_string(arch) : id;
    spec.architecture = arch;
    spec.latent_dim = latent_dim;
    spec.image_shape = shape;
    spec.num_classes = classes;
    spec.output_activation = act;
    std::vector<std::size_t> sizes{latent_dim + classes.value_or(0)};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(shape.pixels());
    std::vector<belong::NamedTensor> params;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const double r = 1.5 / std::sqrt(static_cast<double>(sizes[k]));
        params.push_back({"layer" + std::to_string(k) + ".weight", random_tensor(rng, {sizes[k + 1], sizes[k]}, -r, r)});
        params.push_back({"layer" + std::to_string(k) + ".bias", random_tensor(rng, {sizes[k + 1]}, -0.2, 0.2)});
    }
    return belong::GenerativeModel(spec, std::move(params));
}

inline belong::GenerativeModel grid_model(const std::vector<belong::Tensor>& entries, std::string id = "grid") {
    belong::ModelSpec spec;
    spec.model_id = std::move(id);
    spec.architecture = belong::Architecture::grid;
    spec.latent_dim = 1;
    const auto& s = entries.front().shape();
    spec.image_shape = {s[0], s[1], s[2]};
    std::vector<float> flat;
    for (const auto& e : entries) flat.insert(flat.end(), e.data().begin(), e.data().end());
    return belong::GenerativeModel(spec, {{"codebook", belong::Tensor({entries.size(), spec.image_shape.pixels()},
                                                                      std::move(flat))}});
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("belong-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::string str() const { return path_.string(); }
    std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testing
