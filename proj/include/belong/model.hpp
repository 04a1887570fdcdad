#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belong/rng.hpp"
#include "belong/tensor.hpp"

namespace belong {

struct ImageShape {
    std::size_t channels = 1;
    std::size_t height = 8;
    std::size_t width = 8;

    std::size_t pixels() const { return channels * height * width; }
    Shape shape() const { return {channels, height, width}; }
    bool operator==(const ImageShape&) const = default;
};

std::string to_string(const ImageShape& s);

enum class Architecture { grid, linear, mlp };
enum class OutputActivation { sigmoid, identity };

std::string to_string(Architecture a);
Architecture parse_architecture(const std::string& s);
std::string to_string(OutputActivation a);
OutputActivation parse_output_activation(const std::string& s);

/// A generator input. Grid models take a one-element latent holding the
/// codebook index; stochastic noise is treated as part of the latent.
struct ModelInput {
    Tensor latent;
    std::optional<std::size_t> class_index;
};

struct LabeledImage {
    Tensor image;
    std::optional<std::size_t> label;
};

struct NamedTensor {
    std::string name;
    Tensor value;
};

struct TrainingMeta {
    std::string dataset_id;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

struct ModelSpec {
    std::string model_id;
    Architecture architecture = Architecture::mlp;
    std::size_t latent_dim = 8;
    ImageShape image_shape;
    std::optional<std::size_t> num_classes;
    OutputActivation output_activation = OutputActivation::sigmoid;
};

namespace detail {
struct Network;
}

/// Deterministic image generator with white-box access.
///
/// Layers are `layer<k>.weight` [out, in] and `layer<k>.bias` [out]; hidden
/// layers use tanh and the last layer uses the output activation. A class
/// label enters as a one-hot block appended to the latent. Grid models hold a
/// single `codebook` parameter [K, pixels].
///
/// Evaluation runs in double precision on a copy of the float parameters; the
/// Tensor entry points round the result to float.
class GenerativeModel {
public:
    /// Activations of one evaluation, kept for the backward pass.
    struct Trace {
        std::vector<std::vector<double>> activations;
        std::span<const double> output() const { return activations.back(); }
    };

    GenerativeModel(ModelSpec spec, std::vector<NamedTensor> parameters, TrainingMeta meta = {});

    const ModelSpec& spec() const { return spec_; }
    const std::string& id() const { return spec_.model_id; }
    Architecture architecture() const { return spec_.architecture; }
    std::size_t latent_dim() const { return spec_.latent_dim; }
    const ImageShape& image_shape() const { return spec_.image_shape; }
    std::optional<std::size_t> num_classes() const { return spec_.num_classes; }
    bool conditional() const { return spec_.num_classes.has_value(); }
    bool differentiable() const { return spec_.architecture != Architecture::grid; }
    std::size_t codebook_size() const;
    std::vector<std::size_t> hidden_sizes() const;
    const std::vector<NamedTensor>& parameters() const { return parameters_; }
    const TrainingMeta& meta() const { return meta_; }

    void validate(const ModelInput& input) const;

    Tensor forward(const ModelInput& input) const;
    /// J^T upstream, where J is the Jacobian of forward() w.r.t. the latent.
    Tensor input_gradient(const ModelInput& input, const Tensor& upstream) const;

    std::vector<double> evaluate(std::span<const double> latent, std::optional<std::size_t> class_index) const;
    void evaluate(std::span<const double> latent, std::optional<std::size_t> class_index, Trace& trace) const;
    std::vector<double> pullback(const Trace& trace, std::span<const double> upstream) const;

    /// Codebook entry k as an image (grid models only).
    Tensor codebook_entry(std::size_t k) const;

private:
    void check_class(std::optional<std::size_t> class_index) const;

    ModelSpec spec_;
    std::vector<NamedTensor> parameters_;
    TrainingMeta meta_;
    std::shared_ptr<const detail::Network> net_;
};

/// n i.i.d. inputs: standard-normal latents and uniform class indices
/// (uniform codebook indices for grid models).
std::vector<ModelInput> sample_inputs(const GenerativeModel& m, std::size_t n, Rng& rng);

struct TrainConfig {
    std::string model_id;
    Architecture architecture = Architecture::mlp;
    std::size_t latent_dim = 8;
    std::optional<std::size_t> num_classes;
    std::vector<std::size_t> hidden = {32, 64};
    std::size_t encoder_hidden = 64;
    OutputActivation output_activation = OutputActivation::sigmoid;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double learning_rate = 5e-3;
};

/// Fits the decoder half of an autoencoder to the images and discards the
/// encoder. Grid models memorize the images as their codebook.
GenerativeModel train_decoder(const TrainConfig& config, std::span<const LabeledImage> dataset,
                              const std::string& dataset_id, Rng& rng);

// Checkpoint directory: manifest.json + weights.bin (RNTZ tensors in manifest order).
void save_model(const GenerativeModel& m, const std::string& dir);
GenerativeModel load_model(const std::string& dir);

}  // namespace belong
