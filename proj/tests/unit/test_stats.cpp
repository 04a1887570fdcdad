#include <numbers>

#include "doctest.h"
#include "belong/error.hpp"
#include "belong/stats.hpp"
#include "oracles.hpp"

using namespace belong;

TEST_CASE("t density basics") {
    CHECK(t_pdf(0.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    for (double nu : {1.0, 3.0, 10.0}) {
        for (double t : {0.3, 1.7, 6.0}) CHECK(t_pdf(t, nu) == t_pdf(-t, nu));
    }
    const double mass = oracle::integrate([](double x) { return t_pdf(x, 10.0); }, -50.0, 50.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("t cdf against quadrature") {
    for (double nu : {1.0, 2.5, 5.0, 10.0, 98.0}) {
        CHECK(t_cdf(0.0, nu) == 0.5);
        for (double t = -10.0; t <= 10.0; t += 0.5) {
            CHECK(std::abs(t_cdf(t, nu) - oracle::t_cdf(t, nu)) < 1e-8);
            CHECK(t_cdf(-t, nu) == doctest::Approx(1.0 - t_cdf(t, nu)).epsilon(1e-12));
        }
    }
    CHECK(std::abs(t_cdf(1e6, 5.0) - 1.0) < 1e-9);
    CHECK(std::abs(t_cdf(2.2281, 10.0) - 0.9749983532067628) < 1e-4);
}

TEST_CASE("t cdf is monotone and bounded") {
    double prev = 0.0;
    for (double t = -40.0; t <= 40.0; t += 0.25) {
        const double c = t_cdf(t, 4.0);
        CHECK(c >= prev);
        CHECK((c >= 0.0 && c <= 1.0));
        prev = c;
    }
}

TEST_CASE("t quantile") {
    CHECK(t_quantile(0.5, 7.0) == 0.0);
    CHECK(std::abs(t_quantile(0.975, 10.0) - 2.2281388519649385) < 1e-3);
    CHECK(std::abs(t_quantile(0.975, 10.0) - oracle::t_quantile(0.975, 10.0)) < 1e-8);
    for (double nu : {1.0, 5.0, 10.0, 98.0}) {
        for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 0.999983}) {
            CHECK(std::abs(t_cdf(t_quantile(p, nu), nu) - p) < 1e-8);
        }
    }
    CHECK_THROWS(t_quantile(0.0, 5.0));
    CHECK_THROWS(t_quantile(1.0, 5.0));
}

TEST_CASE("incomplete beta edge values") {
    CHECK(incomplete_beta(0.0, 2.0, 3.0) == 0.0);
    CHECK(incomplete_beta(1.0, 2.0, 3.0) == 1.0);
    // I_x(1, 1) = x and I_x(a, 1) = x^a.
    CHECK(incomplete_beta(0.37, 1.0, 1.0) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(incomplete_beta(0.6, 3.0, 1.0) == doctest::Approx(0.216).epsilon(1e-12));
}

TEST_CASE("grubbs threshold") {
    CHECK(std::abs(grubbs_threshold(3, 0.05) - 1.1531180614225602) < 1e-3);
    CHECK(std::abs(grubbs_threshold(3, 0.05) - oracle::grubbs(3, 0.05)) < 1e-8);
    CHECK(std::abs(grubbs_threshold(100, 0.05) - 3.2095203020308305) < 1e-6);
    CHECK(std::abs(grubbs_threshold(10, 0.05) - oracle::grubbs(10, 0.05)) < 1e-8);
    for (std::size_t n : {3u, 4u, 10u, 100u, 1000u}) {
        const double nn = static_cast<double>(n);
        CHECK(grubbs_threshold(n, 0.05) < (nn - 1) / std::sqrt(nn));
        double prev = 1e9;
        for (double a : {0.001, 0.01, 0.05, 0.1, 0.2, 0.5}) {
            const double g = grubbs_threshold(n, a);
            CHECK(g < prev);
            prev = g;
        }
    }
    CHECK_THROWS_AS(grubbs_threshold(2, 0.05), DegenerateError);
    CHECK_THROWS(grubbs_threshold(10, 0.0));
}

TEST_CASE("grubbs decisions") {
    CHECK(grubbs_decide(2.0, 2.0, 0.5, 100, 0.05).decision == Decision::belonging);
    CHECK(grubbs_decide(2.0, 2.0, 0.5, 100, 0.05).z == 0.0);
    CHECK(grubbs_decide(1.0 + 100 * 0.1, 1.0, 0.1, 100, 0.05).decision == Decision::non_belonging);
    const auto mid = grubbs_decide(1.05, 1.0, 0.1, 100, 0.05);
    CHECK(mid.z == doctest::Approx(0.5));
    CHECK(mid.decision == Decision::belonging);
    CHECK(mid.threshold == doctest::Approx(3.2095203020308305).epsilon(1e-9));
    // One-sided: tiny losses are always belonging.
    CHECK(grubbs_decide(-50.0, 1.0, 0.1, 100, 0.05).decision == Decision::belonging);
    CHECK_THROWS_AS(grubbs_decide(1.0, 1.0, 0.0, 100, 0.05), DegenerateError);
}

TEST_CASE("grubbs decision is scale invariant and monotone") {
    const double mu = 0.3, sigma = 0.05;
    for (double a : {0.2, 0.3, 0.41, 0.45, 0.47, 0.9}) {
        const auto base = grubbs_decide(a, mu, sigma, 50, 0.05);
        for (double c : {1e-6, 0.5, 3.0, 1e4}) {
            const auto scaled = grubbs_decide(a * c, mu * c, sigma * c, 50, 0.05);
            CHECK(scaled.decision == base.decision);
            CHECK(scaled.z == doctest::Approx(base.z).epsilon(1e-9));
        }
    }
    bool seen_non = false;
    for (double a = 0.0; a < 1.0; a += 0.001) {
        const bool non = grubbs_decide(a, mu, sigma, 50, 0.05).decision == Decision::non_belonging;
        CHECK(!(seen_non && !non));
        seen_non |= non;
    }
}

TEST_CASE("distribution validation") {
    BelongingDistribution d{"m", "r", MetricId::mse, 10, 0.1, 0.02, 0.05, "abc", true};
    CHECK_NOTHROW(d.validate());
    d.sigma = 0.0;
    CHECK_THROWS(d.validate());
    d.sigma = 0.02;
    d.n = 2;
    CHECK_THROWS(d.validate());
}
