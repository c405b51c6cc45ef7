#include "qsparse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsparse/error.hpp"
#include "qsparse/noise.hpp"

namespace qsparse {

SupportSet true_support(std::span<const double> theta) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (theta[i] != 0.0) idx.push_back(i);
    return SupportSet::from_zero_based(theta.size(), std::move(idx));
}

double quantile_rate(std::span<const double> theta, const SupportSet& support,
                     const QuantileLevel& level, const SelectorConfig& cfg) {
    if (support.n() != theta.size())
        throw InvalidInput("quantile_rate: support dimension does not match theta");
    const Vector residual = project(theta, support.complement());
    return rho(level, residual) + cfg.varkappa() * penalty(support);
}

namespace {

OracleResult finish(std::span<const double> theta, SupportSet support, const QuantileLevel& level,
                    const SelectorConfig& cfg) {
    OracleResult out;
    out.residual = rho(level, project(theta, support.complement()));
    out.penalty_part = cfg.varkappa() * penalty(support);
    out.oracle_rate = out.residual + out.penalty_part;
    out.oracle_support = std::move(support);
    return out;
}

}  // namespace

OracleResult oracle(std::span<const double> theta, const QuantileLevel& level,
                    const SelectorConfig& cfg) {
    std::vector<double> b(theta.size());
    std::transform(theta.begin(), theta.end(), b.begin(), [&](double v) { return level.rho(v); });
    SelectionResult sel = minimize_penalized(b, cfg.varkappa());
    return finish(theta, std::move(sel.support), level, cfg);
}

OracleResult brute_force_oracle(std::span<const double> theta, const QuantileLevel& level,
                                const SelectorConfig& cfg) {
    // C(I) with multiplier varkappa is exactly r_varkappa(theta, I).
    const SelectorConfig swapped = SelectorConfig::degenerate(cfg.varkappa(), cfg.varkappa());
    SelectionResult sel = brute_force_select(theta, level, swapped);
    return finish(theta, std::move(sel.support), level, cfg);
}

double ebr_t_star(const OracleResult& r) {
    if (r.residual == 0.0) return 0.0;
    if (r.oracle_support.empty()) return std::numeric_limits<double>::infinity();
    return r.residual / penalty(r.oracle_support);
}

bool in_theta_c(std::span<const double> theta, double C) {
    const SupportSet I0 = true_support(theta);
    if (I0.empty()) return true;
    const double floor =
        C * std::sqrt(1.0 + std::log(static_cast<double>(theta.size()) / static_cast<double>(I0.size())));
    return std::all_of(I0.indices().begin(), I0.indices().end(),
                       [&](std::size_t i) { return std::fabs(theta[i]) >= floor; });
}

EbrAssessment ebr_assess(std::span<const double> theta, const QuantileLevel& level,
                         const SelectorConfig& cfg, double C) {
    if (!(C > 0.0)) throw InvalidInput("ebr_assess: C must be positive");
    EbrAssessment out;
    out.t_star = ebr_t_star(oracle(theta, level, cfg));
    out.in_theta_c = in_theta_c(theta, C);
    return out;
}

bool oracle_vs_true_check(std::span<const double> theta, const QuantileLevel& level,
                          const SelectorConfig& cfg) {
    const OracleResult o = oracle(theta, level, cfg);
    const SupportSet I0 = true_support(theta);
    const double rate_true = quantile_rate(theta, I0, level, cfg);
    return o.oracle_rate <= rate_true && penalty(o.oracle_support) <= penalty(I0) &&
           o.oracle_support.size() <= I0.size();
}

ThetaCCalibration calibrate_theta_c(std::size_t n, std::size_t s, const QuantileLevel& level,
                                    const SelectorConfig& cfg, std::uint64_t seed,
                                    std::size_t samples, double C0, std::size_t max_steps) {
    if (n == 0) throw InvalidInput("calibrate_theta_c: n must be >= 1");
    if (s > n) throw InvalidInput("calibrate_theta_c: s exceeds n");
    if (!(C0 > 0.0)) throw InvalidInput("calibrate_theta_c: C0 must be positive");

    // Unit-C draws; scaling by C reproduces the Theta(C) boundary exactly.
    std::vector<Vector> unit;
    unit.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        Engine engine = make_engine(seed, k);
        SignalSpec spec;
        spec.cls = SignalClass::theta_c;
        spec.n = n;
        spec.C = 1.0;
        if (s == 0) {
            std::uniform_int_distribution<std::size_t> pick(1, n);
            spec.s = pick(engine);
        } else {
            spec.s = s;
        }
        unit.push_back(sample_signal(spec, engine));
    }

    double C = C0;
    Vector theta(n);
    for (std::size_t step = 0; step <= max_steps; ++step, C *= 1.1) {
        bool all_zero = true;
        for (const Vector& u : unit) {
            std::transform(u.begin(), u.end(), theta.begin(), [&](double v) { return C * v; });
            if (ebr_t_star(oracle(theta, level, cfg)) != 0.0) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) return {C, step};
    }
    throw CalibrationError("calibrate_theta_c: no C on the grid puts all samples in Theta_eb(0)");
}

}  // namespace qsparse
