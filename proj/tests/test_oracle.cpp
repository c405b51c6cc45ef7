#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "qsparse/error.hpp"
#include "qsparse/oracle.hpp"

using namespace qsparse;

namespace {
const QuantileLevel kHalf(0.5);
const SelectorConfig kUnit(1.0, 1.0);
}  // namespace

TEST_CASE("true support") {
    CHECK(true_support(std::vector<double>{0, 3, 0, -1}).one_based() == std::vector<std::size_t>{2, 4});
    CHECK(true_support(std::vector<double>(5, 0.0)).empty());
    CHECK(true_support(std::vector<double>{1e-300, 0}).one_based() == std::vector<std::size_t>{1});
}

TEST_CASE("oracle hand examples") {
    const auto r = oracle(std::vector<double>{10, 0, 0}, kHalf, kUnit);
    CHECK(r.oracle_support.one_based() == std::vector<std::size_t>{1});
    CHECK(r.oracle_rate == doctest::Approx(1.4487).epsilon(1e-4));
    CHECK(r.residual == 0.0);

    const auto z = oracle(std::vector<double>(4, 0.0), kHalf, kUnit);
    CHECK(z.oracle_support.empty());
    CHECK(z.oracle_rate == 0.0);

    const std::vector<double> tiny(6, 1e-6);
    const auto t = oracle(tiny, kHalf, kUnit);
    CHECK(t.oracle_support.empty());
    CHECK(t.oracle_rate == doctest::Approx(6 * 1e-6 * 0.5));
    CHECK(brute_force_oracle(tiny, kHalf, kUnit).oracle_rate == doctest::Approx(t.oracle_rate));
}

TEST_CASE("oracle uses the oracle multiplier, not the selector one") {
    const std::vector<double> theta{3, 0, 0, 0};
    const auto small = oracle(theta, kHalf, SelectorConfig(100.0, 0.1));
    const auto large = oracle(theta, kHalf, SelectorConfig(0.1, 100.0));
    CHECK(small.oracle_support.size() == 1);
    CHECK(large.oracle_support.empty());
}

TEST_CASE("oracle matches exhaustive search") {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> vk(0.1, 5.0);
    for (int i = 0; i < 400; ++i) {
        const auto theta = ref::random_vector(g, 1 + i % 11);
        const SelectorConfig cfg(1.0, vk(g));
        const auto r = oracle(theta, QuantileLevel(0.25), cfg);
        CHECK(ref::rel_close(r.oracle_rate, ref::exhaustive_min(0.25, theta, cfg.varkappa()), 1e-12));
        CHECK(ref::rel_close(r.oracle_rate, r.residual + r.penalty_part, 1e-12));
        CHECK(ref::rel_close(r.oracle_rate, quantile_rate(theta, r.oracle_support, QuantileLevel(0.25), cfg), 1e-12));
    }
}

TEST_CASE("oracle rate never exceeds the rate at the true support") {
    std::mt19937_64 g(4);
    for (int i = 0; i < 1000; ++i) {
        const auto theta = ref::random_vector(g, 50, 10.0);
        CHECK(oracle_vs_true_check(theta, kHalf, SelectorConfig(1.0, 3.0)));
    }
    CHECK(oracle_vs_true_check(std::vector<double>{10, 0, 0}, kHalf, kUnit));
    CHECK(oracle_vs_true_check(std::vector<double>(3, 0.0), kHalf, kUnit));
}

TEST_CASE("excessive bias level") {
    CHECK(ebr_assess(std::vector<double>{10, 0, 0}, kHalf, kUnit, 1.0).t_star == 0.0);
    CHECK(ebr_assess(std::vector<double>(3, 0.0), kHalf, kUnit, 1.0).t_star == 0.0);
    CHECK(std::isinf(ebr_assess(std::vector<double>(6, 1e-6), kHalf, kUnit, 1.0).t_star));
    CHECK_THROWS_AS(ebr_assess(std::vector<double>{1.0}, kHalf, kUnit, 0.0), InvalidInput);

    // Partial residual: theta = (10, 0.3, 0, 0) keeps only the large entry.
    const std::vector<double> theta{10, 0.3, 0, 0};
    const auto r = oracle(theta, kHalf, kUnit);
    REQUIRE(r.oracle_support.one_based() == std::vector<std::size_t>{1});
    CHECK(ebr_t_star(r) == doctest::Approx(0.15 / ref::pen(1, 4)));
}

TEST_CASE("Theta(C) membership") {
    const double floor = 2.0 * std::sqrt(std::log(std::exp(1.0) * 4 / 2));
    CHECK(in_theta_c(std::vector<double>{floor, 0, -floor * 1.01, 0}, 2.0));
    CHECK_FALSE(in_theta_c(std::vector<double>{floor * 0.99, 0, -floor, 0}, 2.0));
    CHECK(in_theta_c(std::vector<double>(4, 0.0), 2.0));
}

TEST_CASE("calibrated Theta(C) threshold makes the oracle recover the true support") {
    const QuantileLevel q(0.5);
    const SelectorConfig cfg(2.8, 14.5);
    const auto cal = calibrate_theta_c(60, 4, q, cfg, 99, 200);
    CHECK(cal.C > 0.0);
    std::mt19937_64 g(1);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> theta(60, 0.0);
        const double a = cal.C * std::sqrt(std::log(std::exp(1.0) * 60 / 4));
        for (int k = 0; k < 4; ++k) theta[(i * 7 + k * 13) % 60] = (k % 2 ? -1 : 1) * a * (1 + 0.1 * k);
        CHECK(oracle(theta, q, cfg).oracle_support == true_support(theta));
    }
}
