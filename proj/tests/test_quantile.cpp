#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "qsparse/error.hpp"
#include "qsparse/quantile.hpp"

using namespace qsparse;

TEST_CASE("quantile level validation and constants") {
    CHECK_THROWS_AS(QuantileLevel(0.0), InvalidInput);
    CHECK_THROWS_AS(QuantileLevel(1.0), InvalidInput);
    CHECK_THROWS_AS(QuantileLevel(std::nan("")), InvalidInput);
    const QuantileLevel q(0.25);
    CHECK(q.c() == doctest::Approx(0.75));
    CHECK(q.C() == doctest::Approx(3.0));
    CHECK(QuantileLevel(0.5).C() == doctest::Approx(1.0));
}

TEST_CASE("rho on hand examples") {
    CHECK(rho(QuantileLevel(0.5), std::vector<double>{2, -4}) == doctest::Approx(3.0));
    CHECK(rho(QuantileLevel(0.9), std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(rho(QuantileLevel(0.25), std::vector<double>{4, -4}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(rho(QuantileLevel(0.5), std::vector<double>{}), InvalidInput);
}

TEST_CASE("rho agrees with the definition on random vectors") {
    std::mt19937_64 g(11);
    for (double tau : {0.1, 0.3, 0.5, 0.8}) {
        const QuantileLevel q(tau);
        for (int i = 0; i < 2000; ++i) {
            const auto x = ref::random_vector(g, 1 + i % 40);
            CHECK(ref::rel_close(rho(q, x), ref::rho(tau, x), 1e-13));
        }
    }
}

TEST_CASE("loss inequalities hold on random draws") {
    std::mt19937_64 g(5);
    for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const QuantileLevel q(tau);
        const double c = q.c();
        for (int i = 0; i < 2000; ++i) {
            const auto x = ref::random_vector(g, 1 + i % 25);
            const auto y = ref::random_vector(g, x.size());
            std::vector<double> neg(x.size()), sum(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k], sum[k] = x[k] + y[k];
            const double l1 = l1_norm(x), rx = rho(q, x), slack = 1e-12 * std::max(1.0, l1);
            CHECK((1 - c) * l1 <= rx + slack);
            CHECK(rx <= c * l1 + slack);
            CHECK(rho(q, neg) <= q.C() * rx + slack);
            CHECK(rho(q, sum) <= rx + rho(q, y) + 1e-12 * std::max(1.0, l1 + l1_norm(y)));
        }
    }
}

TEST_CASE("support sets") {
    const auto I = SupportSet::from_one_based(5, {4, 2});
    CHECK(I.indices() == std::vector<std::size_t>{1, 3});
    CHECK(I.one_based() == std::vector<std::size_t>{2, 4});
    CHECK(I.contains(3));
    CHECK_FALSE(I.contains(0));
    CHECK(I.complement().one_based() == std::vector<std::size_t>{1, 3, 5});
    CHECK(SupportSet::full(3).size() == 3);
    CHECK_THROWS_AS(SupportSet::from_one_based(3, {0}), InvalidInput);
    CHECK_THROWS_AS(SupportSet::from_one_based(3, {2, 2}), InvalidInput);
    CHECK_THROWS_AS(SupportSet::from_zero_based(3, {3}), InvalidInput);
}

TEST_CASE("projection") {
    const std::vector<double> x{1, 2, 3};
    CHECK(project(x, SupportSet::from_one_based(3, {1, 3})) == std::vector<double>{1, 0, 3});
    CHECK(project(x, SupportSet::full(3)) == x);
    CHECK(project(x, SupportSet(3)) == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(project(x, SupportSet(4)), InvalidInput);
}

TEST_CASE("projection minimizes the loss to the subspace") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    const QuantileLevel q(0.3);
    for (int i = 0; i < 500; ++i) {
        const auto x = ref::random_vector(g, 6);
        const auto I = SupportSet::from_zero_based(6, {0, 2, 5});
        auto px = project(x, I);
        std::vector<double> diff(6);
        for (int k = 0; k < 6; ++k) diff[k] = x[k] - px[k];
        const double best = rho(q, diff);
        auto y = px;
        for (auto k : I.indices()) y[k] += z(g);
        for (int k = 0; k < 6; ++k) diff[k] = x[k] - y[k];
        CHECK(best <= rho(q, diff) + 1e-12);
    }
}

TEST_CASE("complexity and penalty values") {
    CHECK(complexity(std::size_t{0}, std::size_t{7}) == 0.0);
    CHECK(complexity(std::size_t{9}, std::size_t{9}) == doctest::Approx(9.0));
    CHECK(complexity(std::size_t{1}, std::size_t{8}) == doctest::Approx(1 + std::log(8.0)).epsilon(1e-12));
    CHECK(complexity(std::size_t{1}, std::size_t{8}) == doctest::Approx(3.0794).epsilon(1e-4));
    CHECK_THROWS_AS(complexity(-1LL, 4LL), InvalidInput);
    CHECK_THROWS_AS(complexity(5LL, 4LL), InvalidInput);
    CHECK(penalty(SupportSet(8)) == 0.0);
    CHECK(penalty(SupportSet::full(8)) == doctest::Approx(8.0));
    CHECK(penalty(SupportSet::from_one_based(8, {1, 5})) == doctest::Approx(3.0896).epsilon(1e-4));
    for (std::size_t n = 1; n < 60; ++n)
        for (std::size_t k = 0; k <= n; ++k) CHECK(ref::rel_close(penalty_of_size(k, n), ref::pen(k, n), 1e-14));
}

TEST_CASE("penalty is increasing in the support size") {
    for (std::size_t n : {1u, 2u, 10u, 1000u})
        for (std::size_t k = 1; k <= n; ++k) CHECK(penalty_of_size(k, n) > penalty_of_size(k - 1, n));
}

TEST_CASE("complexity sum bound") {
    const auto one = complexity_sum_bound(1, 2.0);
    CHECK(one.sum == doctest::Approx(std::exp(-2.0)));
    CHECK(one.bound == doctest::Approx(1 / (std::exp(1.0) - 1)));
    CHECK(complexity_sum_bound(10, 2.0).sum <= 0.5820);
    CHECK(complexity_sum_bound(30, 3.0).bound == doctest::Approx(0.1565).epsilon(1e-3));
    // Direct evaluation of sum_s C(n,s) exp(-nu s (1 + log(n/s))).
    for (std::size_t n = 1; n <= 30; ++n) {
        for (double nu : {1.5, 2.0, 3.0}) {
            long double direct = 0;
            for (std::size_t s = 1; s <= n; ++s)
                direct += std::exp(std::lgamma(n + 1.0L) - std::lgamma(s + 1.0L) - std::lgamma(n - s + 1.0L) -
                                   nu * s * (1 + std::log(static_cast<long double>(n) / s)));
            const auto r = complexity_sum_bound(n, nu);
            CHECK(ref::rel_close(r.sum, static_cast<double>(direct), 1e-12));
            CHECK(r.sum <= r.bound);
        }
    }
    CHECK_THROWS_AS(complexity_sum_bound(31, 2.0), InvalidInput);
    CHECK_THROWS_AS(complexity_sum_bound(5, 1.0), InvalidInput);
}

TEST_CASE("accurate sum survives cancellation") {
    std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    CHECK(static_cast<double>(accurate_sum(v)) == 2.0);
}
