#include "qsparse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "qsparse/error.hpp"
#include "qsparse/oracle.hpp"
#include "qsparse/rng.hpp"
#include "qsparse/selector.hpp"

namespace qsparse {

namespace {

constexpr std::uint64_t kCalibrationStream = 0xca11b4a7e;
constexpr std::uint64_t kEvaluationStream = 0xe7a1ed;
constexpr std::uint64_t kSignalCalibrationStream = 0x7e7a0c;
constexpr std::uint64_t kFixedThetaStream = 0xf1ed;
constexpr std::size_t kMaxRedraws = 1000;

// Runs body(i) for i in [0, count). Results must be written by index so the
// outcome does not depend on `threads`. The exception of the lowest failing
// index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex guard;
    std::size_t failed_at = count;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double frequency(const std::vector<ReplicationRow>& rows, auto&& event) {
    if (rows.empty()) return 0.0;
    const auto hits = std::count_if(rows.begin(), rows.end(), event);
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

}  // namespace

std::uint64_t calibration_seed(std::uint64_t root) { return derive_seed(root, kCalibrationStream); }
std::uint64_t evaluation_seed(std::uint64_t root) { return derive_seed(root, kEvaluationStream); }

C1Constants resolve_c1(const ExperimentConfig& cfg) {
    if (cfg.c1) return *cfg.c1;
    try {
        const QuantileLevel level = cfg.level();
        return subgaussian_c1_constants(level, subgaussian_c0(cfg.noise, level));
    } catch (const NumericError& e) {
        throw ConfigError(std::string(e.what()) + "; give explicit \"c1\" constants");
    }
}

ConstantSet resolve_constants(const ExperimentConfig& cfg) {
    const QuantileLevel level = cfg.level();
    ConstantSet k;
    const bool needs_theory =
        cfg.constants_mode != ConstantsMode::explicit_values ||
        !(cfg.constant_overrides.count("kappa") && cfg.constant_overrides.count("varkappa") &&
          cfg.constant_overrides.count("M1") && cfg.constant_overrides.count("M2") &&
          cfg.constant_overrides.count("M3"));
    if (needs_theory) {
        const C1Constants c1 = resolve_c1(cfg);
        k = theory_constants(c1.M_xi, c1.alpha_xi, cfg.H_xi, level, cfg.t);
    } else {
        k.tau = level.tau();
        k.C_tau = level.C();
        k.t = cfg.t;
    }
    if (cfg.constants_mode == ConstantsMode::explicit_values) {
        nlohmann::json j = k;
        for (const auto& [key, value] : cfg.constant_overrides) {
            if (!j.contains(key)) throw ConfigError("unknown constant '" + key + "'");
            j[key] = value;
        }
        k = j.get<ConstantSet>();
        if (!(k.kappa > 0.0) || !(k.varkappa > 0.0))
            throw ConfigError("explicit kappa and varkappa must be positive");
    }
    return k;
}

void resolve_signal(ExperimentConfig& cfg, const ConstantSet& constants) {
    cfg.signal.n = cfg.n;
    if (!cfg.signal_c_auto) return;
    const ThetaCCalibration cal =
        calibrate_theta_c(cfg.n, std::max<std::size_t>(cfg.signal.s, 1), cfg.level(),
                          constants.selector(), derive_seed(cfg.seed, kSignalCalibrationStream));
    cfg.signal.C = cal.C;
}

bool estimation_exceeds(const ReplicationRow& row, double M1) {
    return row.loss > 0.0 && row.loss >= M1 * row.oracle_rate;
}

bool ball_covers(const ReplicationRow& row, double M2) { return row.loss <= M2 * row.raw_radius; }

bool size_exceeds(const ReplicationRow& row, double M3) {
    return row.raw_radius > 0.0 && row.raw_radius >= M3 * row.oracle_rate;
}

Aggregates aggregate(const std::vector<ReplicationRow>& rows, const Multipliers& m) {
    Aggregates a;
    a.reps = rows.size();
    if (rows.empty()) return a;
    std::size_t exceed = 0, covered = 0, oversized = 0, nonempty = 0;
    std::vector<double> losses;
    losses.reserve(rows.size());
    for (const auto& row : rows) {
        exceed += estimation_exceeds(row, m.M1);
        covered += ball_covers(row, m.M2);
        oversized += size_exceeds(row, m.M3);
        nonempty += row.selected_size > 0;
        losses.push_back(row.loss);
        a.max_t_star = std::max(a.max_t_star, row.t_star);
        a.rejections += row.rejections;
    }
    const auto total = static_cast<double>(rows.size());
    a.exceedance = static_cast<double>(exceed) / total;
    a.exceedance_ci = binomial_interval(exceed, rows.size());
    a.coverage = static_cast<double>(covered) / total;
    a.coverage_ci = binomial_interval(covered, rows.size());
    a.size_exceedance = static_cast<double>(oversized) / total;
    a.size_exceedance_ci = binomial_interval(oversized, rows.size());
    a.nonempty_selection = static_cast<double>(nonempty) / total;
    a.median_loss = median(std::move(losses));
    return a;
}

std::vector<ReplicationRow> simulate_rows(const ExperimentConfig& cfg, const ConstantSet& constants,
                                          std::uint64_t seed, RunMode mode) {
    const QuantileLevel level = cfg.level();
    const SelectorConfig sel(constants.kappa, constants.varkappa);
    const double shift = quantile_shift(cfg.noise, level);
    SignalSpec signal = cfg.signal;
    signal.n = cfg.n;

    auto admissible = [&](const Vector& theta, double& t_star) {
        t_star = ebr_t_star(oracle(theta, level, sel));
        return mode == RunMode::estimation || t_star <= cfg.t;
    };

    Vector fixed_theta;
    if (!cfg.resample_theta) {
        // Shared by the calibration and evaluation passes.
        Engine engine = make_engine(cfg.seed, kFixedThetaStream);
        fixed_theta = sample_signal(signal, engine);
        double t_star = 0.0;
        if (!admissible(fixed_theta, t_star))
            throw ConfigError("fixed theta violates the EBR condition at t = " + std::to_string(cfg.t));
    }

    std::vector<ReplicationRow> rows(cfg.reps);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
        Engine engine = make_engine(seed, r + 1);
        ReplicationRow row;
        row.rep = r;

        Vector theta;
        if (cfg.resample_theta) {
            for (;;) {
                theta = sample_signal(signal, engine);
                if (admissible(theta, row.t_star)) break;
                if (++row.rejections > kMaxRedraws)
                    throw ConfigError("signal class is not contained in Theta_eb(t): " +
                                      std::to_string(kMaxRedraws) + " consecutive draws rejected");
            }
        } else {
            theta = fixed_theta;
            admissible(theta, row.t_star);
        }

        Vector x(cfg.n);
        sample_noise_into(cfg.noise, shift, engine, x);
        for (std::size_t i = 0; i < cfg.n; ++i) x[i] += theta[i];

        const Estimate est = estimate(x, level, sel);
        Vector diff(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) diff[i] = theta[i] - est.theta_hat[i];
        row.loss = rho(level, diff);
        row.raw_radius = penalty(est.selection.support);
        row.selected_size = est.selection.support.size();

        const OracleResult orc = oracle(theta, level, sel);
        row.oracle_rate = orc.oracle_rate;
        row.oracle_size = orc.oracle_support.size();
        row.true_size = true_support(theta).size();
        rows[r] = row;
    });

    std::size_t rejected = 0;
    for (const auto& row : rows) rejected += row.rejections;
    if (mode == RunMode::uq && 2 * rejected > rejected + rows.size())
        throw ConfigError("more than 50% of signal draws fall outside Theta_eb(t); signal class is mis-specified");
    return rows;
}

namespace {

double multiplier_frequency(const std::vector<ReplicationRow>& rows, CalibrationTarget which, double c) {
    switch (which) {
        case CalibrationTarget::M1:
            return frequency(rows, [&](const ReplicationRow& r) { return estimation_exceeds(r, c); });
        case CalibrationTarget::M2:
            return frequency(rows, [&](const ReplicationRow& r) { return !ball_covers(r, c); });
        case CalibrationTarget::M3:
            return frequency(rows, [&](const ReplicationRow& r) { return size_exceeds(r, c); });
        default: break;
    }
    throw InvalidInput("multiplier_frequency: not a multiplier");
}

double theory_multiplier(const ConstantSet& k, CalibrationTarget which) {
    switch (which) {
        case CalibrationTarget::M1: return k.M1;
        case CalibrationTarget::M2: return k.M2;
        case CalibrationTarget::M3: return k.M3;
        default: break;
    }
    throw InvalidInput("theory_multiplier: not a multiplier");
}

double calibrate_multiplier(const std::vector<ReplicationRow>& rows, const ConstantSet& k,
                            CalibrationTarget which, double target) {
    return bisect_constant([&](double c) { return multiplier_frequency(rows, which, c); }, 0.0,
                           theory_multiplier(k, which), target);
}

ExperimentReport run(ExperimentConfig cfg, RunMode mode) {
    if (cfg.reps < 100) throw ConfigError("reports need reps >= 100");
    ExperimentReport report;
    report.constants = resolve_constants(cfg);
    resolve_signal(cfg, report.constants);
    report.signal_C = cfg.signal.C;
    report.multipliers = {report.constants.M1, report.constants.M2, report.constants.M3};

    if (cfg.constants_mode == ConstantsMode::calibrated) {
        const auto cal = simulate_rows(cfg, report.constants, calibration_seed(cfg.seed), mode);
        report.multipliers.M1 = calibrate_multiplier(cal, report.constants, CalibrationTarget::M1, cfg.alpha1);
        report.multipliers.M2 = calibrate_multiplier(cal, report.constants, CalibrationTarget::M2, cfg.alpha1);
        report.multipliers.M3 = calibrate_multiplier(cal, report.constants, CalibrationTarget::M3, cfg.alpha2);
        report.calibrated = true;
    }

    report.rows = simulate_rows(cfg, report.constants, evaluation_seed(cfg.seed), mode);
    for (auto& row : report.rows) row.covered = ball_covers(row, report.multipliers.M2);
    report.aggregates = aggregate(report.rows, report.multipliers);
    return report;
}

}  // namespace

ExperimentReport run_estimation(ExperimentConfig cfg) { return run(std::move(cfg), RunMode::estimation); }

ExperimentReport run_uq(ExperimentConfig cfg) { return run(std::move(cfg), RunMode::uq); }

std::vector<SweepRow> run_rate_sweep(ExperimentConfig cfg, const std::vector<std::size_t>& s_grid) {
    const ConstantSet constants = resolve_constants(cfg);
    std::vector<SweepRow> out;
    for (std::size_t s : s_grid) {
        if (s < 1 || s > cfg.n) throw InvalidInput("rate sweep: s must lie in [1, n]");
        ExperimentConfig local = cfg;
        local.s = s;
        local.signal.s = s;
        resolve_signal(local, constants);
        const auto rows = simulate_rows(local, constants, derive_seed(evaluation_seed(cfg.seed), s),
                                        RunMode::estimation);
        std::vector<double> losses;
        for (const auto& row : rows) losses.push_back(row.loss);
        SweepRow sr;
        sr.s = s;
        sr.median_loss = median(std::move(losses));
        sr.benchmark = penalty_of_size(s, cfg.n);
        sr.ratio = sr.median_loss / sr.benchmark;
        out.push_back(sr);
    }
    return out;
}

CalibrationTarget parse_calibration_target(const std::string& name) {
    for (auto w : {CalibrationTarget::M1, CalibrationTarget::M2, CalibrationTarget::M3,
                   CalibrationTarget::kappa, CalibrationTarget::C})
        if (to_string(w) == name) return w;
    throw InvalidInput("unknown calibration target '" + name + "' (expected M1, M2, M3, kappa or C)");
}

std::string to_string(CalibrationTarget which) {
    switch (which) {
        case CalibrationTarget::M1: return "M1";
        case CalibrationTarget::M2: return "M2";
        case CalibrationTarget::M3: return "M3";
        case CalibrationTarget::kappa: return "kappa";
        case CalibrationTarget::C: return "C";
    }
    return "unknown";
}

namespace {

// Pure-noise draws for the kappa calibration: frequency of a nonempty selection.
std::vector<Vector> noise_draws(const ExperimentConfig& cfg, std::uint64_t seed) {
    const QuantileLevel level = cfg.level();
    const double shift = quantile_shift(cfg.noise, level);
    std::vector<Vector> out(cfg.reps, Vector(cfg.n));
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
        Engine engine = make_engine(seed, r + 1);
        sample_noise_into(cfg.noise, shift, engine, out[r]);
    });
    return out;
}

double nonempty_frequency(const std::vector<Vector>& draws, const QuantileLevel& level,
                          double kappa, double varkappa) {
    const SelectorConfig sel(kappa, varkappa);
    std::size_t hits = 0;
    for (const auto& x : draws) hits += !select_pattern(x, level, sel).support.empty();
    return static_cast<double>(hits) / static_cast<double>(draws.size());
}

std::vector<Vector> unit_theta_c_draws(const ExperimentConfig& cfg, std::uint64_t seed) {
    SignalSpec spec;
    spec.cls = SignalClass::theta_c;
    spec.n = cfg.n;
    spec.s = std::max<std::size_t>(cfg.signal.s, 1);
    spec.C = 1.0;
    std::vector<Vector> out(cfg.reps);
    for (std::size_t r = 0; r < cfg.reps; ++r) out[r] = sample_signal(spec, derive_seed(seed, r));
    return out;
}

double outside_ebr0_frequency(const std::vector<Vector>& unit, const QuantileLevel& level,
                              const SelectorConfig& sel, double C) {
    std::size_t hits = 0;
    Vector theta;
    for (const auto& u : unit) {
        theta.resize(u.size());
        std::transform(u.begin(), u.end(), theta.begin(), [&](double v) { return C * v; });
        hits += ebr_t_star(oracle(theta, level, sel)) != 0.0;
    }
    return static_cast<double>(hits) / static_cast<double>(unit.size());
}

}  // namespace

CalibrationResult calibrate(ExperimentConfig cfg, double target, CalibrationTarget which) {
    if (!(target > 0.0 && target <= 1.0)) throw InvalidInput("calibration target must lie in (0,1]");
    const ConstantSet constants = resolve_constants(cfg);
    const QuantileLevel level = cfg.level();
    CalibrationResult out;
    out.which = which;

    switch (which) {
        case CalibrationTarget::M1:
        case CalibrationTarget::M2:
        case CalibrationTarget::M3: {
            resolve_signal(cfg, constants);
            const RunMode mode = which == CalibrationTarget::M2 ? RunMode::uq : RunMode::estimation;
            const auto cal = simulate_rows(cfg, constants, calibration_seed(cfg.seed), mode);
            const auto val = simulate_rows(cfg, constants, evaluation_seed(cfg.seed), mode);
            out.bracket_lo = 0.0;
            out.bracket_hi = theory_multiplier(constants, which);
            out.value = calibrate_multiplier(cal, constants, which, target);
            out.calibration_frequency = multiplier_frequency(cal, which, out.value);
            out.validation_frequency = multiplier_frequency(val, which, out.value);
            break;
        }
        case CalibrationTarget::kappa: {
            const auto cal = noise_draws(cfg, calibration_seed(cfg.seed));
            const auto val = noise_draws(cfg, evaluation_seed(cfg.seed));
            out.bracket_hi = constants.kappa;
            out.bracket_lo = 1e-3 * constants.kappa;
            auto f = [&](double k) { return nonempty_frequency(cal, level, k, constants.varkappa); };
            out.value = bisect_constant(f, out.bracket_lo, out.bracket_hi, target);
            out.calibration_frequency = f(out.value);
            out.validation_frequency = nonempty_frequency(val, level, out.value, constants.varkappa);
            break;
        }
        case CalibrationTarget::C: {
            const auto cal = unit_theta_c_draws(cfg, calibration_seed(cfg.seed));
            const auto val = unit_theta_c_draws(cfg, evaluation_seed(cfg.seed));
            const SelectorConfig sel = constants.selector();
            out.bracket_lo = 1e-3;
            out.bracket_hi = 1e4;
            auto f = [&](double C) { return outside_ebr0_frequency(cal, level, sel, C); };
            out.value = bisect_constant(f, out.bracket_lo, out.bracket_hi, target);
            out.calibration_frequency = f(out.value);
            out.validation_frequency = outside_ebr0_frequency(val, level, sel, out.value);
            break;
        }
    }
    return out;
}

nlohmann::json report_summary(const ExperimentReport& report) {
    const Aggregates& a = report.aggregates;
    return nlohmann::json{
        {"schema", "qsparse-summary/1"},
        {"calibrated", report.calibrated},
        {"signal_C", report.signal_C},
        {"constants", report.constants},
        {"multipliers", {{"M1", report.multipliers.M1}, {"M2", report.multipliers.M2}, {"M3", report.multipliers.M3}}},
        {"aggregates",
         {{"reps", a.reps},
          {"exceedance", a.exceedance},
          {"exceedance_ci", {a.exceedance_ci.lower, a.exceedance_ci.upper}},
          {"coverage", a.coverage},
          {"coverage_ci", {a.coverage_ci.lower, a.coverage_ci.upper}},
          {"size_exceedance", a.size_exceedance},
          {"size_exceedance_ci", {a.size_exceedance_ci.lower, a.size_exceedance_ci.upper}},
          {"nonempty_selection", a.nonempty_selection},
          {"median_loss", a.median_loss},
          {"max_t_star", a.max_t_star},
          {"rejections", a.rejections}}}};
}

}  // namespace qsparse
