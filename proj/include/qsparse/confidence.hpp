#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "qsparse/quantile.hpp"
#include "qsparse/selector.hpp"

namespace qsparse {

/// B(center, radius) = {theta : rho(theta - center) <= radius}. The loss is
/// asymmetric, so the order of subtraction is part of the definition.
struct ConfidenceBall {
    Vector center;
    double radius = 0.0;
    double raw_radius = 0.0;  // p(I_hat)
    double multiplier = 1.0;  // M2
};

ConfidenceBall build_ball(std::span<const double> x, const QuantileLevel& level,
                          const SelectorConfig& cfg, double M2);

bool contains(const ConfidenceBall& ball, std::span<const double> theta, const QuantileLevel& level);

/// Constants from the estimation and confidence-ball guarantees, assembled
/// for one (tau, noise tail constants) setting. All strict inequalities required by
/// the guarantees are checked when the set is built.
struct ConstantSet {
    double tau = 0.5;
    double C_tau = 1.0;
    double M_xi = 0.0;
    double alpha_xi = 0.0;
    double H_xi = 0.0;

    double A1 = 0.0;
    double A2 = 0.0;
    double A3 = 0.0;
    double A4 = 0.0;
    double A5 = 0.0;
    double A6 = 0.0;
    double A7 = 0.0;

    double kappa = 0.0;
    double varkappa = 0.0;
    double delta = 0.5;

    double M1 = 0.0;
    double M3 = 0.0;
    double t = 0.0;
    double M2 = 0.0;  // M2(t) at the stored t

    double H1_prime = 0.0;
    double H1 = 0.0;
    double m1 = 0.0;

    /// M2(t) = M1 (t + varkappa) / delta.
    double M2_of_t(double t_value) const { return M1 * (t_value + varkappa) / delta; }

    SelectorConfig selector() const { return SelectorConfig(kappa, varkappa); }
};

ConstantSet theory_constants(double M_xi, double alpha_xi, double H_xi, const QuantileLevel& level,
                             double t = 0.0);

/// Throws NumericError naming the first violated inequality.
void check_constant_invariants(const ConstantSet& k);

/// Finite-n probability bounds assembled term by term at lambda(1) = 1 + log n.
struct GuaranteeBounds {
    double estimation = 0.0;  // H1 e^{-m1 lambda(1)}
    double coverage = 0.0;    // H1 e^{-m1 l} + H1' e^{-A4 l} + H_xi e^{-alpha_xi l}
    double size = 0.0;        // H1' e^{-A4 l} + H_xi e^{-alpha_xi l}
};

GuaranteeBounds guarantee_bounds(const ConstantSet& k, std::size_t n);

void to_json(nlohmann::json& j, const ConstantSet& k);
void from_json(const nlohmann::json& j, ConstantSet& k);

}  // namespace qsparse
