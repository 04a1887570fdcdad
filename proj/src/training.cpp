#include <cmath>
#include <numeric>

#include "belong/adam.hpp"
#include "belong/error.hpp"
#include "belong/model.hpp"
#include "dense.hpp"

namespace belong {

namespace {

using detail::Activation;
using detail::Dense;

Dense init_dense(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    Dense d;
    d.in = in;
    d.out = out;
    d.activation = act;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    d.weight.resize(in * out);
    d.bias.resize(out);
    for (auto& w : d.weight) w = rng.uniform(-bound, bound);
    for (auto& b : d.bias) b = rng.uniform(-bound, bound);
    return d;
}

struct LayerSlot {
    Dense* layer;
    std::vector<double> weight_grad;
    std::vector<double> bias_grad;
    Adam weight_opt;
    Adam bias_opt;

    LayerSlot(Dense* l, AdamSettings s)
        : layer(l),
          weight_grad(l->weight.size()),
          bias_grad(l->bias.size()),
          weight_opt(l->weight.size(), s),
          bias_opt(l->bias.size(), s) {}
};

class Autoencoder {
public:
    Autoencoder(const TrainConfig& cfg, std::size_t pixels, Rng& rng) : cfg_(cfg), pixels_(pixels) {
        const std::size_t classes = cfg.num_classes.value_or(0);
        const Activation out_act =
            cfg.output_activation == OutputActivation::sigmoid ? Activation::sigmoid : Activation::identity;
        std::size_t in = cfg.latent_dim + classes;
        if (cfg.architecture == Architecture::mlp) {
            for (std::size_t h : cfg.hidden) {
                decoder_.push_back(init_dense(in, h, Activation::tanh, rng));
                in = h;
            }
        }
        decoder_.push_back(init_dense(in, pixels, out_act, rng));
        encoder_.push_back(init_dense(pixels, cfg.encoder_hidden, Activation::tanh, rng));
        encoder_.push_back(init_dense(cfg.encoder_hidden, cfg.latent_dim, Activation::identity, rng));
    }

    std::vector<Dense>& decoder() { return decoder_; }
    std::vector<Dense>& encoder() { return encoder_; }

    double forward(std::span<const double> image, std::optional<std::size_t> label) {
        enc_acts_.resize(encoder_.size() + 1);
        enc_acts_[0].assign(image.begin(), image.end());
        for (std::size_t k = 0; k < encoder_.size(); ++k) detail::dense_forward(encoder_[k], enc_acts_[k], enc_acts_[k + 1]);

        dec_acts_.resize(decoder_.size() + 1);
        dec_acts_[0] = enc_acts_.back();
        if (cfg_.num_classes) {
            dec_acts_[0].resize(cfg_.latent_dim + *cfg_.num_classes, 0.0);
            dec_acts_[0][cfg_.latent_dim + *label] = 1.0;
        }
        for (std::size_t k = 0; k < decoder_.size(); ++k) detail::dense_forward(decoder_[k], dec_acts_[k], dec_acts_[k + 1]);

        double loss = 0.0;
        const auto& y = dec_acts_.back();
        for (std::size_t i = 0; i < pixels_; ++i) loss += (y[i] - image[i]) * (y[i] - image[i]);
        return loss / static_cast<double>(pixels_);
    }

    // Accumulates gradients of weight * loss from the last forward().
    void backward(std::span<const double> image, double weight, std::vector<LayerSlot>& dec_slots,
                  std::vector<LayerSlot>& enc_slots) {
        const auto& y = dec_acts_.back();
        std::vector<double> delta(pixels_);
        for (std::size_t i = 0; i < pixels_; ++i) delta[i] = weight * 2.0 * (y[i] - image[i]) / static_cast<double>(pixels_);
        std::vector<double> grad;
        for (std::size_t k = decoder_.size(); k-- > 0;) {
            detail::dense_backward(decoder_[k], dec_acts_[k], dec_acts_[k + 1], delta, grad,
                                   dec_slots[k].weight_grad.data(), dec_slots[k].bias_grad.data());
            delta.swap(grad);
        }
        delta.resize(cfg_.latent_dim);
        for (std::size_t k = encoder_.size(); k-- > 0;) {
            detail::dense_backward(encoder_[k], enc_acts_[k], enc_acts_[k + 1], delta, grad,
                                   enc_slots[k].weight_grad.data(), enc_slots[k].bias_grad.data());
            delta.swap(grad);
        }
    }

private:
    const TrainConfig& cfg_;
    std::size_t pixels_;
    std::vector<Dense> decoder_;
    std::vector<Dense> encoder_;
    std::vector<std::vector<double>> enc_acts_;
    std::vector<std::vector<double>> dec_acts_;
};

void check_dataset(const TrainConfig& cfg, std::span<const LabeledImage> dataset) {
    if (dataset.empty()) throw Error("train_decoder: dataset is empty");
    const Shape& shape = dataset.front().image.shape();
    if (shape.size() != 3) throw ShapeError("training images must be [C,H,W], got " + shape_to_string(shape));
    for (const auto& s : dataset) {
        if (s.image.shape() != shape) {
            throw ShapeError("inconsistent image shapes in dataset: " + shape_to_string(shape) + " vs " +
                             shape_to_string(s.image.shape()));
        }
        if (cfg.num_classes) {
            if (!s.label) throw Error("conditional training needs a label on every image");
            if (*s.label >= *cfg.num_classes) throw Error("image label out of range for num_classes");
        }
    }
}

std::vector<NamedTensor> export_layers(const std::vector<Dense>& layers) {
    std::vector<NamedTensor> params;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const std::string prefix = "layer" + std::to_string(k);
        params.push_back({prefix + ".weight", Tensor::from_doubles({layers[k].out, layers[k].in}, layers[k].weight)});
        params.push_back({prefix + ".bias", Tensor::from_doubles({layers[k].out}, layers[k].bias)});
    }
    return params;
}

}  // namespace

GenerativeModel train_decoder(const TrainConfig& cfg, std::span<const LabeledImage> dataset,
                              const std::string& dataset_id, Rng& rng) {
    check_dataset(cfg, dataset);
    const Shape& s = dataset.front().image.shape();
    ModelSpec spec;
    spec.model_id = cfg.model_id;
    spec.architecture = cfg.architecture;
    spec.latent_dim = cfg.latent_dim;
    spec.image_shape = {s[0], s[1], s[2]};
    spec.num_classes = cfg.num_classes;
    spec.output_activation = cfg.output_activation;

    TrainingMeta meta;
    meta.dataset_id = dataset_id;
    meta.seed = rng.seed();

    if (cfg.architecture == Architecture::grid) {
        if (dataset.size() > 4096) throw ShapeError("grid codebook is limited to 4096 images");
        std::vector<float> codebook;
        for (const auto& img : dataset) codebook.insert(codebook.end(), img.image.data().begin(), img.image.data().end());
        spec.num_classes.reset();
        std::vector<NamedTensor> params{{"codebook", Tensor({dataset.size(), spec.image_shape.pixels()}, codebook)}};
        return GenerativeModel(spec, std::move(params), meta);
    }

    if (cfg.epochs == 0 || cfg.batch_size == 0) throw Error("train_decoder: epochs and batch size must be positive");
    if (cfg.learning_rate <= 0.0) throw Error("train_decoder: learning rate must be positive");

    const std::size_t pixels = spec.image_shape.pixels();
    Autoencoder ae(cfg, pixels, rng);
    const AdamSettings adam{cfg.learning_rate, 0.9, 0.999, 1e-8};
    std::vector<LayerSlot> dec_slots, enc_slots;
    for (auto& l : ae.decoder()) dec_slots.emplace_back(&l, adam);
    for (auto& l : ae.encoder()) enc_slots.emplace_back(&l, adam);

    std::vector<std::vector<double>> images;
    images.reserve(dataset.size());
    for (const auto& d : dataset) images.push_back(d.image.to_doubles());

    auto mean_loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < images.size(); ++i) total += ae.forward(images[i], dataset[i].label);
        return total / static_cast<double>(images.size());
    };

    meta.initial_loss = mean_loss();
    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double weight = 1.0 / static_cast<double>(end - start);
            for (auto* slots : {&dec_slots, &enc_slots}) {
                for (auto& slot : *slots) {
                    std::fill(slot.weight_grad.begin(), slot.weight_grad.end(), 0.0);
                    std::fill(slot.bias_grad.begin(), slot.bias_grad.end(), 0.0);
                }
            }
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t idx = order[b];
                ae.forward(images[idx], dataset[idx].label);
                ae.backward(images[idx], weight, dec_slots, enc_slots);
            }
            for (auto* slots : {&dec_slots, &enc_slots}) {
                for (auto& slot : *slots) {
                    slot.weight_opt.step(slot.layer->weight, slot.weight_grad);
                    slot.bias_opt.step(slot.layer->bias, slot.bias_grad);
                }
            }
        }
    }
    meta.epochs = cfg.epochs;
    meta.learning_rate = cfg.learning_rate;
    meta.final_loss = mean_loss();
    if (!std::isfinite(meta.final_loss)) throw NumericError("train_decoder: training diverged");

    return GenerativeModel(spec, export_layers(ae.decoder()), meta);
}

}  // namespace belong
