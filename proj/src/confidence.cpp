#include "qsparse/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "qsparse/error.hpp"

namespace qsparse {

ConfidenceBall build_ball(std::span<const double> x, const QuantileLevel& level,
                          const SelectorConfig& cfg, double M2) {
    if (!(M2 > 0.0)) throw InvalidInput("build_ball: M2 must be positive");
    Estimate est = estimate(x, level, cfg);
    ConfidenceBall ball;
    ball.raw_radius = penalty(est.selection.support);
    ball.multiplier = M2;
    ball.radius = M2 * ball.raw_radius;
    ball.center = std::move(est.theta_hat);
    return ball;
}

bool contains(const ConfidenceBall& ball, std::span<const double> theta, const QuantileLevel& level) {
    if (theta.size() != ball.center.size())
        throw InvalidInput("contains: dimension mismatch between theta and ball center");
    Vector diff(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) diff[i] = theta[i] - ball.center[i];
    return rho(level, diff) <= ball.radius;
}

ConstantSet theory_constants(double M_xi, double alpha_xi, double H_xi, const QuantileLevel& level,
                             double t) {
    if (!(M_xi > 0.0) || !(alpha_xi > 0.0) || !(H_xi > 0.0))
        throw InvalidInput("theory_constants: M_xi, alpha_xi and H_xi must be positive");
    if (!(t >= 0.0)) throw InvalidInput("theory_constants: t must be >= 0");

    ConstantSet k;
    k.tau = level.tau();
    k.C_tau = level.C();
    k.M_xi = M_xi;
    k.alpha_xi = alpha_xi;
    k.H_xi = H_xi;
    const double Ct = k.C_tau;

    k.A2 = M_xi + std::sqrt(2.0 / alpha_xi);
    k.A3 = alpha_xi * (k.A2 - M_xi) * (k.A2 - M_xi);
    k.A4 = (k.A3 - 1.0) / 2.0;
    k.kappa = k.A2 + 1.0;
    // Strict requirement varkappa > 3 (C_tau M_xi + C_tau + kappa), plus margin 1.
    k.varkappa = 3.0 * (Ct * M_xi + Ct + k.kappa) + 1.0;
    const double vk = k.varkappa;

    k.A1 = (Ct / vk * (M_xi + 1.0) + std::max(k.kappa / vk, 1.0)) / std::min(1.0 / vk, 1.0);
    k.A5 = std::min((k.kappa - k.A2) / vk, 1.0) * k.A1 - std::max(k.kappa / vk, 1.0);
    k.A6 = alpha_xi * std::pow(k.A5 * vk / Ct - M_xi, 2.0);
    k.M1 = k.A1 * std::max(1.0, k.A2 * Ct / vk) + 1.0;

    k.delta = 0.5;
    k.t = t;
    k.M2 = k.M2_of_t(t);

    // (kappa - A2 - 1/M3) M3 varkappa > C_tau (M_xi + 1) is linear in M3.
    k.M3 = (Ct * (M_xi + 1.0) + vk) / ((k.kappa - k.A2) * vk) + 1.0;
    k.A7 = k.kappa - k.A2 - 1.0 / k.M3;

    k.H1_prime = H_xi / std::expm1(k.A4);
    k.H1 = k.H1_prime + H_xi;
    k.m1 = std::min(k.A4, k.A6);

    check_constant_invariants(k);
    return k;
}

void check_constant_invariants(const ConstantSet& k) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw NumericError(std::string("constant invariant violated: ") + what);
    };
    const double Ct = k.C_tau;
    const double vk = k.varkappa;
    const double tol = 1e-9 * std::max(1.0, std::fabs(k.A5));
    require(k.A3 > 1.0, "A3 > 1");
    require(k.A4 > 0.0, "A4 > 0");
    require(k.A2 > k.M_xi, "A2 > M_xi");
    require(k.kappa > k.A2, "kappa > A2");
    require(vk > 3.0 * (Ct * k.M_xi + Ct + k.kappa), "varkappa > 3 (C_tau M_xi + C_tau + kappa)");
    require(std::fabs(k.A5 - Ct / vk * (k.M_xi + 1.0)) <= tol, "A5 = (C_tau/varkappa)(M_xi + 1)");
    require(k.A5 > Ct * k.M_xi / vk, "A5 > C_tau M_xi / varkappa");
    require(k.A6 > 0.0, "A6 > 0");
    require(k.M1 > k.A1 * std::max(1.0, k.A2 * Ct / vk), "M1 > A1 max(1, A2 C_tau / varkappa)");
    require(k.delta > 0.0 && k.delta < 1.0, "delta in (0,1)");
    require(vk * (1.0 - k.delta) / (1.0 + k.delta) - k.kappa > Ct * (k.M_xi + 1.0),
            "varkappa (1-delta)/(1+delta) - kappa > C_tau (M_xi + 1)");
    require(k.A7 > 0.0, "A7 > 0");
    require(k.A7 * k.M3 * vk > Ct * (k.M_xi + 1.0), "A7 M3 varkappa > C_tau (M_xi + 1)");
}

GuaranteeBounds guarantee_bounds(const ConstantSet& k, std::size_t n) {
    if (n == 0) throw InvalidInput("guarantee_bounds: n must be >= 1");
    const double l1 = 1.0 + std::log(static_cast<double>(n));
    GuaranteeBounds b;
    b.estimation = k.H1 * std::exp(-k.m1 * l1);
    b.size = k.H1_prime * std::exp(-k.A4 * l1) + k.H_xi * std::exp(-k.alpha_xi * l1);
    b.coverage = b.estimation + b.size;
    return b;
}

void to_json(nlohmann::json& j, const ConstantSet& k) {
    j = nlohmann::json{{"tau", k.tau},     {"C_tau", k.C_tau},       {"M_xi", k.M_xi},
                       {"alpha_xi", k.alpha_xi}, {"H_xi", k.H_xi},   {"A1", k.A1},
                       {"A2", k.A2},       {"A3", k.A3},             {"A4", k.A4},
                       {"A5", k.A5},       {"A6", k.A6},             {"A7", k.A7},
                       {"kappa", k.kappa}, {"varkappa", k.varkappa}, {"delta", k.delta},
                       {"M1", k.M1},       {"M3", k.M3},             {"t", k.t},
                       {"M2", k.M2},       {"H1_prime", k.H1_prime}, {"H1", k.H1},
                       {"m1", k.m1}};
}

void from_json(const nlohmann::json& j, ConstantSet& k) {
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("tau", k.tau);
    get("C_tau", k.C_tau);
    get("M_xi", k.M_xi);
    get("alpha_xi", k.alpha_xi);
    get("H_xi", k.H_xi);
    get("A1", k.A1);
    get("A2", k.A2);
    get("A3", k.A3);
    get("A4", k.A4);
    get("A5", k.A5);
    get("A6", k.A6);
    get("A7", k.A7);
    get("kappa", k.kappa);
    get("varkappa", k.varkappa);
    get("delta", k.delta);
    get("M1", k.M1);
    get("M3", k.M3);
    get("t", k.t);
    get("M2", k.M2);
    get("H1_prime", k.H1_prime);
    get("H1", k.H1);
    get("m1", k.m1);
}

}  // namespace qsparse
