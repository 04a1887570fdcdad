#include "doctest.h"
#include "belong/dataset.hpp"
#include "belong/error.hpp"
#include "belong/model.hpp"
#include "support.hpp"

using namespace belong;

namespace {

const ImageShape kSmall{1, 4, 4};

ModelInput latent_input(std::vector<float> z, std::optional<std::size_t> cls = std::nullopt) {
    return {Tensor::vector(std::move(z)), cls};
}

}  // namespace

TEST_CASE("grid model returns its codebook entries") {
    Rng rng(1);
    std::vector<Tensor> entries;
    for (int k = 0; k < 5; ++k) entries.push_back(testing::random_tensor(rng, {1, 4, 4}));
    const auto m = testing::grid_model(entries);
    CHECK(m.codebook_size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(m.forward(latent_input({static_cast<float>(k)})) == entries[k]);
    CHECK_THROWS(m.forward(latent_input({5.0f})));
    CHECK_THROWS(m.forward(latent_input({1.5f})));
    CHECK_THROWS_AS(m.input_gradient(latent_input({0.0f}), entries[0]), UnsupportedError);
}

TEST_CASE("linear identity decoder is W z + b with gradient W^T g") {
    Rng rng(2);
    const auto m = testing::random_decoder(rng, Architecture::linear, 3, kSmall, {}, std::nullopt,
                                           OutputActivation::identity);
    const Tensor& w = m.parameters()[0].value;
    const Tensor& b = m.parameters()[1].value;
    const std::vector<float> z{0.4f, -1.2f, 0.9f};
    const Tensor out = m.forward(latent_input(z));
    REQUIRE(out.shape() == kSmall.shape());
    for (std::size_t p = 0; p < 16; ++p) {
        double expect = b.data()[p];
        for (std::size_t j = 0; j < 3; ++j) expect += static_cast<double>(w.at(p, j)) * z[j];
        CHECK(out.data()[p] == doctest::Approx(expect).epsilon(1e-6));
    }
    const Tensor g = testing::random_tensor(rng, kSmall.shape(), -1, 1);
    const Tensor grad = m.input_gradient(latent_input(z), g);
    REQUIRE(grad.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        double expect = 0.0;
        for (std::size_t p = 0; p < 16; ++p) expect += static_cast<double>(w.at(p, j)) * g.data()[p];
        CHECK(grad.data()[j] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("mlp input gradient matches central differences") {
    Rng rng(3);
    for (std::optional<std::size_t> classes : {std::optional<std::size_t>{}, std::optional<std::size_t>{3}}) {
        const auto m = testing::random_decoder(rng, Architecture::mlp, 5, kSmall, {7, 9}, classes);
        const std::optional<std::size_t> cls = classes ? std::optional<std::size_t>{1} : std::nullopt;
        std::vector<double> z(5);
        for (auto& v : z) v = rng.normal();
        std::vector<double> up(16);
        for (auto& v : up) v = rng.uniform(-1, 1);

        GenerativeModel::Trace trace;
        m.evaluate(z, cls, trace);
        const auto grad = m.pullback(trace, up);
        REQUIRE(grad.size() == 5);
        const double h = 1e-5;
        for (std::size_t j = 0; j < 5; ++j) {
            auto zp = z, zm = z;
            zp[j] += h;
            zm[j] -= h;
            const auto fp = m.evaluate(zp, cls);
            const auto fm = m.evaluate(zm, cls);
            double fd = 0.0;
            for (std::size_t p = 0; p < 16; ++p) fd += up[p] * (fp[p] - fm[p]) / (2 * h);
            CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("zero upstream gives zero input gradient") {
    Rng rng(4);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 4, kSmall, {6, 5});
    const Tensor grad = m.input_gradient(latent_input({0.1f, 0.2f, 0.3f, 0.4f}), Tensor::zeros(kSmall.shape()));
    for (float v : grad.data()) CHECK(v == 0.0f);
}

TEST_CASE("sigmoid outputs lie in the unit interval") {
    Rng rng(5);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 4, kSmall, {6, 5});
    for (const auto& in : sample_inputs(m, 20, rng)) {
        const Tensor out = m.forward(in);
        for (float v : out.data()) CHECK((v >= 0.0f && v <= 1.0f));
    }
}

TEST_CASE("input validation") {
    Rng rng(6);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 4, kSmall, {6, 5}, 3);
    CHECK_THROWS(m.forward(latent_input({0, 0, 0}, 0)));
    CHECK_THROWS(m.forward(latent_input({0, 0, 0, 0}, 3)));
    CHECK_THROWS(m.forward(latent_input({0, 0, 0, 0})));
    CHECK_NOTHROW(m.forward(latent_input({0, 0, 0, 0}, 2)));
}

TEST_CASE("sample_inputs draws standard normal latents") {
    Rng rng(7);
    const auto m = testing::random_decoder(rng, Architecture::linear, 8, kSmall, {}, 4);
    const auto inputs = sample_inputs(m, 10000, rng);
    double sum = 0.0, sq = 0.0;
    std::vector<int> classes(4, 0);
    for (const auto& in : inputs) {
        for (float v : in.latent.data()) {
            sum += v;
            sq += static_cast<double>(v) * v;
        }
        ++classes[in.class_index.value()];
    }
    const double n = 10000.0 * 8;
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    for (int c : classes) CHECK(c > 2300);
    CHECK_THROWS(sample_inputs(m, 0, rng));
}

TEST_CASE("training reduces reconstruction loss and is deterministic") {
    DatasetSpec spec;
    spec.count = 64;
    spec.seed = 3;
    const Dataset ds = synth_dataset(spec);
    TrainConfig cfg;
    cfg.model_id = "unit-mlp";
    cfg.epochs = 40;
    Rng r1(11), r2(11);
    const auto a = train_decoder(cfg, ds.items, ds.id, r1);
    const auto b = train_decoder(cfg, ds.items, ds.id, r2);
    CHECK(a.meta().final_loss < 0.5 * a.meta().initial_loss);
    REQUIRE(a.parameters().size() == b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i) CHECK(a.parameters()[i].value == b.parameters()[i].value);
    CHECK(a.hidden_sizes() == std::vector<std::size_t>{32, 64});

    TrainConfig grid = cfg;
    grid.architecture = Architecture::grid;
    Rng r3(1);
    const auto g = train_decoder(grid, ds.items, ds.id, r3);
    REQUIRE(g.codebook_size() == ds.items.size());
    CHECK(g.codebook_entry(7) == ds.items[7].image);

    CHECK_THROWS(train_decoder(cfg, std::span<const LabeledImage>{}, "empty", r3));
}

TEST_CASE("checkpoint round-trip preserves outputs") {
    Rng rng(8);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 8, {3, 4, 4}, {10, 12}, 2);
    testing::TempDir dir("ckpt");
    save_model(m, dir / "model");
    const auto back = load_model(dir / "model");
    CHECK(back.id() == m.id());
    CHECK(back.num_classes() == m.num_classes());
    for (const auto& in : sample_inputs(m, 32, rng)) CHECK(back.forward(in) == m.forward(in));
    CHECK_THROWS_AS(load_model(dir / "missing"), MissingArtifactError);
}
