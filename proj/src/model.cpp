#include "belong/model.hpp"

#include <cmath>

#include "belong/error.hpp"
#include "dense.hpp"

namespace belong {

std::string to_string(const ImageShape& s) {
    return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::grid: return "grid";
        case Architecture::linear: return "linear";
        case Architecture::mlp: return "mlp";
    }
    return "?";
}

Architecture parse_architecture(const std::string& s) {
    if (s == "grid") return Architecture::grid;
    if (s == "linear") return Architecture::linear;
    if (s == "mlp") return Architecture::mlp;
    throw Error("unknown architecture '" + s + "' (expected grid, linear or mlp)");
}

std::string to_string(OutputActivation a) { return a == OutputActivation::sigmoid ? "sigmoid" : "identity"; }

OutputActivation parse_output_activation(const std::string& s) {
    if (s == "sigmoid") return OutputActivation::sigmoid;
    if (s == "identity") return OutputActivation::identity;
    throw Error("unknown output activation '" + s + "'");
}

namespace {

const Tensor& find_param(const std::vector<NamedTensor>& params, const std::string& name) {
    for (const auto& p : params) {
        if (p.name == name) return p.value;
    }
    throw FormatError("model is missing parameter '" + name + "'");
}

std::shared_ptr<const detail::Network> build_network(const ModelSpec& spec, const std::vector<NamedTensor>& params) {
    auto net = std::make_shared<detail::Network>();
    const std::size_t pixels = spec.image_shape.pixels();

    if (spec.architecture == Architecture::grid) {
        if (params.size() != 1) throw FormatError("grid model expects exactly one 'codebook' parameter");
        const Tensor& cb = find_param(params, "codebook");
        if (cb.rank() != 2 || cb.shape()[1] != pixels) {
            throw ShapeError("codebook shape " + shape_to_string(cb.shape()) + " does not hold " +
                             to_string(spec.image_shape) + " images");
        }
        if (cb.shape()[0] > 4096) throw ShapeError("grid codebook is limited to 4096 entries");
        for (float v : cb.data()) {
            if (v < 0.0f || v > 1.0f) throw FormatError("codebook values must lie in [0, 1]");
        }
        net->codebook = cb.to_doubles();
        net->codebook_rows = cb.shape()[0];
        return net;
    }

    const std::size_t expected_layers = spec.architecture == Architecture::linear ? 1 : 3;
    if (params.size() != 2 * expected_layers) {
        throw FormatError(to_string(spec.architecture) + " model expects " + std::to_string(2 * expected_layers) +
                          " parameters, got " + std::to_string(params.size()));
    }
    std::size_t in = spec.latent_dim + spec.num_classes.value_or(0);
    for (std::size_t k = 0; k < expected_layers; ++k) {
        const std::string prefix = "layer" + std::to_string(k);
        const Tensor& w = find_param(params, prefix + ".weight");
        const Tensor& b = find_param(params, prefix + ".bias");
        if (w.rank() != 2 || w.shape()[1] != in) {
            throw ShapeError(prefix + ".weight has shape " + shape_to_string(w.shape()) + ", expected [*," +
                             std::to_string(in) + "]");
        }
        const std::size_t out = w.shape()[0];
        if (b.shape() != Shape{out}) {
            throw ShapeError(prefix + ".bias has shape " + shape_to_string(b.shape()) + ", expected [" +
                             std::to_string(out) + "]");
        }
        const bool last = k + 1 == expected_layers;
        if (last && out != pixels) {
            throw ShapeError("output layer produces " + std::to_string(out) + " values, image needs " +
                             std::to_string(pixels));
        }
        detail::Dense layer;
        layer.in = in;
        layer.out = out;
        layer.weight = w.to_doubles();
        layer.bias = b.to_doubles();
        if (!last) {
            layer.activation = detail::Activation::tanh;
        } else {
            layer.activation = spec.output_activation == OutputActivation::sigmoid ? detail::Activation::sigmoid
                                                                                    : detail::Activation::identity;
        }
        net->layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

}  // namespace

GenerativeModel::GenerativeModel(ModelSpec spec, std::vector<NamedTensor> parameters, TrainingMeta meta)
    : spec_(std::move(spec)), parameters_(std::move(parameters)), meta_(std::move(meta)) {
    if (spec_.image_shape.pixels() == 0) throw ShapeError("image shape must be positive");
    if (spec_.num_classes && *spec_.num_classes == 0) throw ShapeError("num_classes must be positive");
    if (spec_.architecture == Architecture::grid) {
        spec_.latent_dim = 1;
        if (spec_.num_classes) throw Error("grid models are not class-conditional");
    } else if (spec_.latent_dim == 0) {
        throw ShapeError("latent dimension must be positive");
    }
    net_ = build_network(spec_, parameters_);
}

std::size_t GenerativeModel::codebook_size() const { return net_->codebook_rows; }

std::vector<std::size_t> GenerativeModel::hidden_sizes() const {
    std::vector<std::size_t> sizes;
    for (std::size_t k = 0; k + 1 < net_->layers.size(); ++k) sizes.push_back(net_->layers[k].out);
    return sizes;
}

void GenerativeModel::check_class(std::optional<std::size_t> class_index) const {
    if (conditional() && !class_index) throw Error("model '" + id() + "' is class-conditional; class index required");
    if (!conditional() && class_index) throw Error("model '" + id() + "' is unconditional; class index not allowed");
    if (class_index && *class_index >= *spec_.num_classes) {
        throw Error("class index " + std::to_string(*class_index) + " out of range [0, " +
                    std::to_string(*spec_.num_classes) + ")");
    }
}

void GenerativeModel::validate(const ModelInput& input) const {
    if (input.latent.rank() != 1 || input.latent.size() != latent_dim()) {
        throw ShapeError("latent shape " + shape_to_string(input.latent.shape()) + " does not match model d_z = " +
                         std::to_string(latent_dim()));
    }
    check_class(input.class_index);
    if (architecture() == Architecture::grid) {
        const float k = input.latent[0];
        if (k < 0.0f || k != std::floor(k) || static_cast<std::size_t>(k) >= codebook_size()) {
            throw Error("grid index " + std::to_string(k) + " is not an integer in [0, " +
                        std::to_string(codebook_size()) + ")");
        }
    }
}

Tensor GenerativeModel::codebook_entry(std::size_t k) const {
    if (architecture() != Architecture::grid) throw UnsupportedError("codebook_entry needs a grid model");
    if (k >= codebook_size()) throw Error("codebook index out of range");
    const std::size_t p = image_shape().pixels();
    return Tensor::from_doubles(image_shape().shape(),
                                std::span<const double>(net_->codebook).subspan(k * p, p));
}

Tensor GenerativeModel::forward(const ModelInput& input) const {
    validate(input);
    if (architecture() == Architecture::grid) return codebook_entry(static_cast<std::size_t>(input.latent[0]));
    const auto latent = input.latent.to_doubles();
    return Tensor::from_doubles(image_shape().shape(), evaluate(latent, input.class_index));
}

Tensor GenerativeModel::input_gradient(const ModelInput& input, const Tensor& upstream) const {
    if (!differentiable()) throw UnsupportedError("input_gradient: grid models have no input gradient");
    validate(input);
    if (upstream.shape() != image_shape().shape()) {
        throw ShapeError("upstream shape " + shape_to_string(upstream.shape()) + " differs from image shape " +
                         shape_to_string(image_shape().shape()));
    }
    Trace trace;
    const auto latent = input.latent.to_doubles();
    evaluate(latent, input.class_index, trace);
    const auto up = upstream.to_doubles();
    return Tensor::from_doubles({latent_dim()}, pullback(trace, up));
}

std::vector<double> GenerativeModel::evaluate(std::span<const double> latent,
                                              std::optional<std::size_t> class_index) const {
    Trace trace;
    evaluate(latent, class_index, trace);
    return std::move(trace.activations.back());
}

void GenerativeModel::evaluate(std::span<const double> latent, std::optional<std::size_t> class_index,
                               Trace& trace) const {
    if (!differentiable()) throw UnsupportedError("evaluate: grid models are indexed, use forward()");
    if (latent.size() != latent_dim()) throw ShapeError("latent length does not match d_z");
    check_class(class_index);
    const auto& layers = net_->layers;
    trace.activations.resize(layers.size() + 1);
    auto& input = trace.activations[0];
    input.assign(latent.begin(), latent.end());
    if (conditional()) {
        input.resize(latent_dim() + *spec_.num_classes, 0.0);
        input[latent_dim() + *class_index] = 1.0;
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        detail::dense_forward(layers[k], trace.activations[k], trace.activations[k + 1]);
    }
}

std::vector<double> GenerativeModel::pullback(const Trace& trace, std::span<const double> upstream) const {
    if (!differentiable()) throw UnsupportedError("pullback: grid models have no input gradient");
    const auto& layers = net_->layers;
    if (upstream.size() != image_shape().pixels()) throw ShapeError("upstream length does not match image");
    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> grad;
    for (std::size_t k = layers.size(); k-- > 0;) {
        detail::dense_backward(layers[k], trace.activations[k], trace.activations[k + 1], delta, grad);
        delta.swap(grad);
    }
    delta.resize(latent_dim());
    return delta;
}

std::vector<ModelInput> sample_inputs(const GenerativeModel& m, std::size_t n, Rng& rng) {
    if (n == 0) throw Error("sample_inputs: n must be at least 1");
    std::vector<ModelInput> inputs;
    inputs.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (m.architecture() == Architecture::grid) {
            inputs.push_back({Tensor::vector({static_cast<float>(rng.index(m.codebook_size()))}), std::nullopt});
            continue;
        }
        std::vector<float> z(m.latent_dim());
        for (auto& v : z) v = static_cast<float>(rng.normal());
        std::optional<std::size_t> cls;
        if (m.conditional()) cls = rng.index(*m.num_classes());
        inputs.push_back({Tensor::vector(std::move(z)), cls});
    }
    return inputs;
}

}  // namespace belong
