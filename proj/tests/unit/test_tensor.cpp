#include <set>
#include <sstream>

#include "doctest.h"
#include "belong/adam.hpp"
#include "belong/error.hpp"
#include "belong/parallel.hpp"
#include "belong/tensor.hpp"
#include "support.hpp"

using namespace belong;

TEST_CASE("elementwise ops on matching shapes") {
    const Tensor a({2, 2}, {1, 2, 3, 4});
    const Tensor b({2, 2}, {0.5f, -1, 2, 0});
    CHECK(add(a, b) == Tensor({2, 2}, {1.5f, 1, 5, 4}));
    CHECK(sub(a, b) == Tensor({2, 2}, {0.5f, 3, 1, 4}));
    CHECK(mul(a, b) == Tensor({2, 2}, {0.5f, -2, 6, 0}));
    CHECK(scale(a, 2.0) == Tensor({2, 2}, {2, 4, 6, 8}));
}

TEST_CASE("shape mismatch names both shapes") {
    const Tensor a({2, 3}, std::vector<float>(6, 1.0f));
    const Tensor b({3, 2}, std::vector<float>(6, 1.0f));
    try {
        (void)add(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[3,2]") != std::string::npos);
    }
}

TEST_CASE("constructor rejects bad data") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({0, 2}, {}), ShapeError);
    CHECK_THROWS_AS(Tensor({2}, {1.0f, std::nanf("")}), NumericError);
    CHECK_THROWS_AS(Tensor({1}, {std::numeric_limits<float>::infinity()}), NumericError);
}

TEST_CASE("matmul agrees with a triple loop") {
    Rng rng(5);
    const Tensor a = testing::random_tensor(rng, {5, 7}, -1, 1);
    const Tensor b = testing::random_tensor(rng, {7, 3}, -1, 1);
    const Tensor c = matmul(a, b);
    REQUIRE(c.shape() == Shape{5, 3});
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 7; ++k) acc += static_cast<double>(a.at(i, k)) * b.at(k, j);
            CHECK(c.at(i, j) == doctest::Approx(acc).epsilon(1e-6));
        }
    }
    CHECK(matmul(Tensor::identity(5), a) == a);
    CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("binary format round-trips") {
    Rng rng(9);
    for (const Shape& shape : {Shape{}, Shape{3}, Shape{2, 4}, Shape{3, 2, 5}}) {
        const Tensor t = shape.empty() ? Tensor::scalar(-2.5f) : testing::random_tensor(rng, shape, -3, 3);
        std::stringstream ss;
        write_tensor(t, ss);
        const Tensor back = read_tensor(ss);
        CHECK(back == t);
        CHECK(back.rank() == shape.size());
    }
}

TEST_CASE("binary format header layout") {
    std::stringstream ss;
    write_tensor(Tensor({2, 3}, std::vector<float>(6, 0.0f)), ss);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 2 * 4 + 6 * 4);
    CHECK(bytes.substr(0, 4) == "RNTZ");
    CHECK(bytes[4] == 1);
    CHECK(bytes[16] == 2);
    CHECK(bytes[20] == 3);
}

TEST_CASE("malformed streams are rejected") {
    std::stringstream good;
    write_tensor(Tensor({4}, {1, 2, 3, 4}), good);
    const std::string bytes = good.str();

    std::stringstream bad_magic("XNTZ" + bytes.substr(4));
    CHECK_THROWS_AS(read_tensor(bad_magic), FormatError);

    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_tensor(truncated), FormatError);

    std::string wrong_version = bytes;
    wrong_version[4] = 7;
    std::stringstream wv(wrong_version);
    CHECK_THROWS_AS(read_tensor(wv), FormatError);

    CHECK_THROWS_AS(load_tensor("/nonexistent/tensor.bin"), MissingArtifactError);
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
    CHECK(Rng::derive(1, 2).next_u64() == Rng::derive(1, 2).next_u64());
    CHECK(Rng::derive(1, 2).next_u64() != Rng::derive(1, 3).next_u64());
}

TEST_CASE("rng distributions") {
    Rng rng(7);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        ++counts[rng.index(5)];
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    for (int c : counts) CHECK(std::abs(c - n / 5) < 400);
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
    for (std::size_t threads : {1u, 4u}) {
        set_thread_count(threads);
        std::vector<int> hits(257, 0);
        parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
        CHECK(std::set<int>(hits.begin(), hits.end()) == std::set<int>{1});
        CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                            if (i == 3) throw Error("boom");
                        }),
                        Error);
    }
    set_thread_count(1);
}

TEST_CASE("first Adam step moves by the learning rate") {
    // Bias correction makes m_hat = g and v_hat = g^2 after one step.
    Adam opt(2, {});
    std::vector<double> x{1.0, -3.0};
    const std::vector<double> g{2.0, -0.5};
    opt.step(x, g);
    CHECK(x[0] == doctest::Approx(1.0 - 0.05 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(-3.0 + 0.05 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("Adam minimizes a quadratic") {
    Adam opt(3, {0.05});
    std::vector<double> x{2.0, -1.0, 0.5};
    const std::vector<double> target{0.3, 0.7, -0.2};
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> g(3);
        for (int i = 0; i < 3; ++i) g[i] = 2.0 * (x[i] - target[i]);
        opt.step(x, g);
    }
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(target[i]).epsilon(1e-3));
}
