#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsparse/quantile.hpp"

namespace qsparse {

/// Penalty multipliers: kappa drives the data-driven selection, varkappa the
/// oracle benchmark.
class SelectorConfig {
public:
    SelectorConfig(double kappa, double varkappa);

    /// Allows kappa == 0 or varkappa == 0. Only meant for tests of the
    /// unpenalized limit.
    static SelectorConfig degenerate(double kappa, double varkappa);

    double kappa() const noexcept { return kappa_; }
    double varkappa() const noexcept { return varkappa_; }

private:
    struct Unchecked {};
    SelectorConfig(double kappa, double varkappa, Unchecked) : kappa_(kappa), varkappa_(varkappa) {}

    double kappa_;
    double varkappa_;
};

struct SelectionResult {
    SupportSet support;
    double criterion_value = 0.0;
    /// Criterion at each candidate size 0..n (empty for brute force results).
    std::vector<double> size_profile;
};

/// Minimizes sum_{k not in I} b_k + multiplier * p(I) over all I, given
/// per-coordinate costs b_k >= 0. Sizes are scanned 0..n after sorting the
/// costs; ties in the criterion go to the smaller size, ties among equal
/// costs go to the smaller coordinate index.
SelectionResult minimize_penalized(std::span<const double> costs, double multiplier);

/// C(I) = rho(P_{I^c} X) + kappa p(I).
double criterion(std::span<const double> x, const SupportSet& support, const QuantileLevel& level,
                 const SelectorConfig& cfg);

SelectionResult select_pattern(std::span<const double> x, const QuantileLevel& level,
                               const SelectorConfig& cfg);

struct Estimate {
    Vector theta_hat;
    SelectionResult selection;
};

Estimate estimate(std::span<const double> x, const QuantileLevel& level, const SelectorConfig& cfg);

inline constexpr std::size_t kBruteForceMaxDim = 15;

/// Exhaustive minimization of C(I) over all 2^n subsets; n <= 15.
SelectionResult brute_force_select(std::span<const double> x, const QuantileLevel& level,
                                   const SelectorConfig& cfg);

}  // namespace qsparse
