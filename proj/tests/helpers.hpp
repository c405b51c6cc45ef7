#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

// Reference implementations written straight from the definitions. They are
// deliberately naive so they share no code path with the library.
namespace ref {

inline double rho(double tau, const std::vector<double>& x) {
    long double s = 0;
    for (double v : x) s += static_cast<long double>(v) * (tau - (v <= 0.0 ? 1.0 : 0.0));
    return static_cast<double>(s);
}

inline double pen(std::size_t k, std::size_t n) {
    if (k == 0) return 0.0;
    return static_cast<double>(k) * std::sqrt(std::log(std::exp(1.0) * n / static_cast<double>(k)));
}

// min over all 2^n masks of rho(x outside mask) + mult * pen(|mask|)
inline double exhaustive_min(double tau, const std::vector<double>& x, double mult) {
    const std::size_t n = x.size();
    double best = INFINITY;
    for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
        std::vector<double> rest;
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1ul)
                ++k;
            else
                rest.push_back(x[i]);
        }
        best = std::min(best, rho(tau, rest) + mult * pen(k, n));
    }
    return best;
}

inline std::vector<double> random_vector(std::mt19937_64& g, std::size_t n, double scale = 3.0) {
    std::normal_distribution<double> z(0.0, scale);
    std::bernoulli_distribution zero(0.3);
    std::vector<double> x(n);
    for (auto& v : x) v = zero(g) ? 0.0 : z(g);
    return x;
}

inline bool rel_close(double a, double b, double rel) {
    return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace ref
