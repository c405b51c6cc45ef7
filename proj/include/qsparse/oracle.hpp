#pragma once

#include <cstdint>
#include <span>

#include "qsparse/quantile.hpp"
#include "qsparse/selector.hpp"

namespace qsparse {

struct OracleResult {
    SupportSet oracle_support;   // I_o
    double oracle_rate = 0.0;    // r(theta) = residual + penalty_part
    double residual = 0.0;       // rho(theta - P_{I_o} theta)
    double penalty_part = 0.0;   // varkappa p(I_o)
};

/// {i : theta_i != 0}, compared exactly.
SupportSet true_support(std::span<const double> theta);

/// r_varkappa(theta, I) = rho(theta - P_I theta) + varkappa p(I).
double quantile_rate(std::span<const double> theta, const SupportSet& support,
                     const QuantileLevel& level, const SelectorConfig& cfg);

OracleResult oracle(std::span<const double> theta, const QuantileLevel& level,
                    const SelectorConfig& cfg);

/// Exhaustive reference for the oracle; n <= 15.
OracleResult brute_force_oracle(std::span<const double> theta, const QuantileLevel& level,
                                const SelectorConfig& cfg);

struct EbrAssessment {
    /// Smallest t with theta in Theta_eb(t); +infinity when the oracle is
    /// empty but leaves a positive residual.
    double t_star = 0.0;
    bool in_theta_c = false;
};

double ebr_t_star(const OracleResult& oracle_result);

/// True iff every nonzero theta_i satisfies |theta_i| >= C sqrt(log(e n / |I_0|)).
bool in_theta_c(std::span<const double> theta, double C);

EbrAssessment ebr_assess(std::span<const double> theta, const QuantileLevel& level,
                         const SelectorConfig& cfg, double C);

/// r(theta) <= r(theta, I_0), p(I_o) <= p(I_0) and |I_o| <= |I_0|.
bool oracle_vs_true_check(std::span<const double> theta, const QuantileLevel& level,
                          const SelectorConfig& cfg);

struct ThetaCCalibration {
    double C = 0.0;
    std::size_t steps = 0;
};

/// Smallest C on the grid C0 * 1.1^k such that every one of `samples` draws
/// from Theta(C) (magnitudes exactly at the boundary, random signs and
/// positions) has t_star == 0. `s == 0` draws the support size uniformly
/// from 1..n per sample; otherwise it is fixed.
ThetaCCalibration calibrate_theta_c(std::size_t n, std::size_t s, const QuantileLevel& level,
                                    const SelectorConfig& cfg, std::uint64_t seed,
                                    std::size_t samples = 1000, double C0 = 0.05,
                                    std::size_t max_steps = 400);

}  // namespace qsparse
