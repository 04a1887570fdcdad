#include "doctest.h"
#include "belong/error.hpp"
#include "belong/inversion.hpp"
#include "belong/parallel.hpp"
#include "support.hpp"

using namespace belong;

namespace {

// Linear identity-output decoder whose weight columns are orthonormal, built
// by Gram-Schmidt on random vectors.
GenerativeModel orthonormal_linear(Rng& rng, std::size_t d, const ImageShape& shape, std::vector<std::vector<double>>& cols) {
    const std::size_t p = shape.pixels();
    cols.clear();
    while (cols.size() < d) {
        std::vector<double> v(p);
        for (auto& x : v) x = rng.normal();
        for (const auto& c : cols) {
            double dot = 0;
            for (std::size_t i = 0; i < p; ++i) dot += v[i] * c[i];
            for (std::size_t i = 0; i < p; ++i) v[i] -= dot * c[i];
        }
        double norm = 0;
        for (double x : v) norm += x * x;
        for (auto& x : v) x /= std::sqrt(norm);
        cols.push_back(v);
    }
    std::vector<float> w(p * d);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < d; ++j) w[i * d + j] = static_cast<float>(cols[j][i]);
    }
    ModelSpec spec;
    spec.model_id = "ortho";
    spec.architecture = Architecture::linear;
    spec.latent_dim = d;
    spec.image_shape = shape;
    spec.output_activation = OutputActivation::identity;
    return GenerativeModel(spec, {{"layer0.weight", Tensor({p, d}, std::move(w))},
                                  {"layer0.bias", Tensor::zeros({p})}});
}

}  // namespace

TEST_CASE("linear decoder inversion recovers the least-squares solution") {
    Rng rng(1);
    std::vector<std::vector<double>> cols;
    const ImageShape shape{1, 8, 8};
    const auto m = orthonormal_linear(rng, 4, shape, cols);
    InversionConfig cfg;
    cfg.steps_per_restart = 1500;
    cfg.early_stop_loss = 1e-12;
    for (int trial = 0; trial < 3; ++trial) {
        const Tensor z = Tensor::vector({static_cast<float>(rng.normal()), static_cast<float>(rng.normal()),
                                         static_cast<float>(rng.normal()), static_cast<float>(rng.normal())});
        const Tensor x = m.forward({z, std::nullopt});
        const auto r = reverse_engineer(m, x, MetricId::mse, cfg);
        CHECK(r.best_loss < 1e-8);
        for (std::size_t j = 0; j < 4; ++j) {
            double ls = 0;  // W^T x
            for (std::size_t i = 0; i < shape.pixels(); ++i) ls += cols[j][i] * x.data()[i];
            CHECK(std::abs(r.best_input.latent.data()[j] - ls) < 1e-3);
        }
    }
}

TEST_CASE("result bookkeeping invariants") {
    Rng rng(2);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 4, {1, 6, 6}, {8, 7}, 2);
    const Tensor x = testing::random_tensor(rng, {1, 6, 6});
    InversionConfig cfg;
    cfg.restarts = 3;
    cfg.steps_per_restart = 60;
    for (MetricId metric : {MetricId::mse, MetricId::mae, MetricId::ssim}) {
        const auto r = reverse_engineer(m, x, metric, cfg);
        CHECK(r.per_restart_losses.size() == 6);  // restarts x classes
        CHECK(r.trace.size() == 6);
        CHECK(r.best_loss == *std::min_element(r.per_restart_losses.begin(), r.per_restart_losses.end()));
        CHECK(r.best_loss == distance(metric, m.forward(r.best_input), x));
        CHECK(r.best_input.class_index.has_value());
        CHECK(r.steps_used <= 6 * 60);
        CHECK(r.abandoned_restarts == 0);
    }
}

TEST_CASE("inversion is deterministic across thread counts") {
    Rng rng(3);
    const auto m = testing::random_decoder(rng, Architecture::mlp, 4, {1, 6, 6}, {8, 7});
    const Tensor x = m.forward(sample_inputs(m, 1, rng)[0]);
    InversionConfig cfg;
    cfg.steps_per_restart = 100;
    cfg.seed = 99;
    set_thread_count(1);
    const auto a = reverse_engineer(m, x, MetricId::mse, cfg);
    set_thread_count(4);
    const auto b = reverse_engineer(m, x, MetricId::mse, cfg);
    set_thread_count(1);
    CHECK(a.best_loss == b.best_loss);
    CHECK(a.best_input.latent == b.best_input.latent);
    CHECK(a.per_restart_losses == b.per_restart_losses);
    cfg.seed = 100;
    CHECK(reverse_engineer(m, x, MetricId::mse, cfg).per_restart_losses != a.per_restart_losses);
}

TEST_CASE("divergent restarts are abandoned") {
    Rng rng(4);
    const auto m = testing::random_decoder(rng, Architecture::linear, 3, {1, 4, 4}, {}, std::nullopt,
                                           OutputActivation::identity);
    const Tensor x = testing::random_tensor(rng, {1, 4, 4});
    InversionConfig cfg;
    cfg.restarts = 2;
    cfg.steps_per_restart = 50;
    cfg.learning_rate = 1e300;  // the first update overflows the latent
    CHECK_THROWS_AS(reverse_engineer(m, x, MetricId::mse, cfg), NumericError);
}

TEST_CASE("exhaustive inversion matches a brute-force scan") {
    Rng rng(5);
    std::vector<Tensor> entries;
    for (int k = 0; k < 20; ++k) entries.push_back(testing::random_tensor(rng, {1, 5, 5}));
    const auto m = testing::grid_model(entries);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto r = exhaustive_invert(m, entries[k], MetricId::mse);
        CHECK(r.best_loss == 0.0);
        CHECK(r.best_input.latent.data()[0] == static_cast<float>(k));
    }
    for (MetricId metric : {MetricId::mse, MetricId::mae, MetricId::ssim}) {
        for (int trial = 0; trial < 10; ++trial) {
            const Tensor x = testing::random_tensor(rng, {1, 5, 5});
            double best = 1e300;
            std::size_t arg = 0;
            for (std::size_t k = 0; k < entries.size(); ++k) {
                const double d = distance(metric, entries[k], x);
                if (d < best) best = d, arg = k;
            }
            const auto r = exhaustive_invert(m, x, metric);
            CHECK(r.best_loss == best);
            CHECK(r.best_input.latent.data()[0] == static_cast<float>(arg));
            CHECK(r.best_loss > 0.0);
        }
    }
    InversionConfig cfg;
    CHECK_THROWS_AS(reverse_engineer(m, entries[0], MetricId::mse, cfg), UnsupportedError);
    CHECK(reconstruction_loss(m, entries[3], MetricId::mse, cfg).best_loss == 0.0);
}

TEST_CASE("config validation") {
    InversionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.restarts = 0;
    CHECK_THROWS(cfg.validate());
    cfg.restarts = 1;
    cfg.learning_rate = 0.0;
    CHECK_THROWS(cfg.validate());
    InversionConfig a, b;
    b.seed = 1;
    CHECK(a.canonical() != b.canonical());
}
