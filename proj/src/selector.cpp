#include "qsparse/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qsparse/error.hpp"

namespace qsparse {

SelectorConfig::SelectorConfig(double kappa, double varkappa) : kappa_(kappa), varkappa_(varkappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw InvalidInput("kappa must be positive and finite");
    if (!(varkappa > 0.0) || !std::isfinite(varkappa))
        throw InvalidInput("varkappa must be positive and finite");
}

SelectorConfig SelectorConfig::degenerate(double kappa, double varkappa) {
    if (!(kappa >= 0.0) || !(varkappa >= 0.0))
        throw InvalidInput("penalty multipliers must be nonnegative");
    return SelectorConfig(kappa, varkappa, Unchecked{});
}

SelectionResult minimize_penalized(std::span<const double> costs, double multiplier) {
    const std::size_t n = costs.size();
    if (n == 0) throw InvalidInput("selection needs at least one coordinate");

    // Coordinates ordered by decreasing cost; equal costs keep index order so
    // that the smaller index is admitted first.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return costs[a] > costs[b]; });

    // residual[i] = sum of the n - i smallest costs, accumulated from the
    // small end so that every partial sum is a compensated long double sum.
    std::vector<long double> residual(n + 1, 0.0L);
    {
        long double sum = 0.0L;
        long double carry = 0.0L;
        for (std::size_t i = n; i-- > 0;) {
            // residual[i] adds the (i+1)-th largest cost, i.e. order[i].
            const long double v = costs[order[i]];
            const long double t = sum + v;
            carry += (std::fabs(sum) >= std::fabs(v)) ? (sum - t) + v : (v - t) + sum;
            sum = t;
            residual[i] = sum + carry;
        }
    }

    SelectionResult out;
    out.size_profile.resize(n + 1);
    std::size_t best = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        const long double value =
            residual[i] + static_cast<long double>(multiplier) * penalty_of_size(i, n);
        out.size_profile[i] = static_cast<double>(value);
        if (out.size_profile[i] < out.size_profile[best]) best = i;
    }
    out.criterion_value = out.size_profile[best];
    out.support = SupportSet::from_zero_based(
        n, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best)));
    return out;
}

namespace {

std::vector<double> coordinate_losses(std::span<const double> x, const QuantileLevel& level) {
    std::vector<double> b(x.size());
    std::transform(x.begin(), x.end(), b.begin(), [&](double v) { return level.rho(v); });
    return b;
}

}  // namespace

double criterion(std::span<const double> x, const SupportSet& support, const QuantileLevel& level,
                 const SelectorConfig& cfg) {
    if (support.n() != x.size())
        throw InvalidInput("criterion: support dimension does not match data length");
    const Vector residual = project(x, support.complement());
    return rho(level, residual) + cfg.kappa() * penalty(support);
}

SelectionResult select_pattern(std::span<const double> x, const QuantileLevel& level,
                               const SelectorConfig& cfg) {
    return minimize_penalized(coordinate_losses(x, level), cfg.kappa());
}

Estimate estimate(std::span<const double> x, const QuantileLevel& level, const SelectorConfig& cfg) {
    Estimate out;
    out.selection = select_pattern(x, level, cfg);
    out.theta_hat = project(x, out.selection.support);
    return out;
}

SelectionResult brute_force_select(std::span<const double> x, const QuantileLevel& level,
                                   const SelectorConfig& cfg) {
    const std::size_t n = x.size();
    if (n == 0) throw InvalidInput("brute_force_select: empty data");
    if (n > kBruteForceMaxDim)
        throw CombinatorialLimit("brute_force_select refuses n = " + std::to_string(n) +
                                 " (limit " + std::to_string(kBruteForceMaxDim) + ")");

    SelectionResult best;
    best.criterion_value = std::numeric_limits<double>::infinity();
    const std::size_t subsets = std::size_t{1} << n;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) idx.push_back(i);
        SupportSet candidate = SupportSet::from_zero_based(n, std::move(idx));
        const double value = criterion(x, candidate, level, cfg);
        if (value < best.criterion_value ||
            (value == best.criterion_value && candidate.size() < best.support.size())) {
            best.criterion_value = value;
            best.support = std::move(candidate);
        }
    }
    return best;
}

}  // namespace qsparse
