#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qsparse/confidence.hpp"
#include "qsparse/noise.hpp"
#include "qsparse/stats.hpp"

namespace qsparse {

enum class ConstantsMode { theory, calibrated, explicit_values };

struct ExperimentConfig {
    std::size_t n = 500;
    std::size_t s = 10;
    double tau = 0.5;
    NoiseSpec noise;
    SignalSpec signal;
    bool signal_c_auto = false;  // theta-C with "C": "auto"

    ConstantsMode constants_mode = ConstantsMode::theory;
    /// Explicit overrides (keys present in the config's constants object).
    std::map<std::string, double> constant_overrides;
    std::optional<C1Constants> c1;
    double H_xi = 2.0;

    std::size_t reps = 500;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double alpha1 = 0.05;
    double alpha2 = 0.05;
    double t = 0.0;
    bool resample_theta = true;

    std::size_t c1_n = 256;
    std::size_t c1_reps = 10000;

    QuantileLevel level() const { return QuantileLevel(tau); }
};

/// Parses the JSON experiment document. Errors carry the line of the
/// offending token or key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Seeds for the two disjoint replication streams.
std::uint64_t calibration_seed(std::uint64_t root);
std::uint64_t evaluation_seed(std::uint64_t root);

/// Tail-condition constants for the configured noise: explicit block if given,
/// otherwise the sub-Gaussian derivation at the family's exact c0.
C1Constants resolve_c1(const ExperimentConfig& cfg);

/// Theory preset with explicit overrides applied. M1/M2/M3 in calibrated
/// mode are the theory values here; calibration replaces them later.
ConstantSet resolve_constants(const ExperimentConfig& cfg);

/// Fills in the theta-C magnitude when the config asks for "auto".
void resolve_signal(ExperimentConfig& cfg, const ConstantSet& constants);

struct ReplicationRow {
    std::size_t rep = 0;
    double loss = 0.0;         // rho(theta - theta_hat)
    double oracle_rate = 0.0;  // r(theta)
    double raw_radius = 0.0;   // p(I_hat)
    bool covered = false;      // loss <= M2 raw_radius
    std::size_t selected_size = 0;
    std::size_t oracle_size = 0;
    std::size_t true_size = 0;
    double t_star = 0.0;
    std::size_t rejections = 0;
};

struct Multipliers {
    double M1 = 0.0;
    double M2 = 0.0;
    double M3 = 0.0;
};

/// Event definitions shared by aggregation and calibration.
bool estimation_exceeds(const ReplicationRow& row, double M1);
bool ball_covers(const ReplicationRow& row, double M2);
bool size_exceeds(const ReplicationRow& row, double M3);

struct Aggregates {
    std::size_t reps = 0;
    double exceedance = 0.0;
    Interval exceedance_ci{0.0, 0.0};
    double coverage = 0.0;
    Interval coverage_ci{0.0, 0.0};
    double size_exceedance = 0.0;
    Interval size_exceedance_ci{0.0, 0.0};
    double nonempty_selection = 0.0;
    double median_loss = 0.0;
    double max_t_star = 0.0;
    std::size_t rejections = 0;
};

Aggregates aggregate(const std::vector<ReplicationRow>& rows, const Multipliers& m);

struct ExperimentReport {
    ConstantSet constants;
    Multipliers multipliers;
    std::vector<ReplicationRow> rows;
    Aggregates aggregates;
    bool calibrated = false;
    double signal_C = 0.0;
};

enum class RunMode { estimation, uq };

/// Raw replications on one seed. In uq mode theta is redrawn until it lies in
/// Theta_eb(t); more than 50% rejected draws aborts with ConfigError.
std::vector<ReplicationRow> simulate_rows(const ExperimentConfig& cfg, const ConstantSet& constants,
                                          std::uint64_t seed, RunMode mode);

ExperimentReport run_estimation(ExperimentConfig cfg);
ExperimentReport run_uq(ExperimentConfig cfg);

struct SweepRow {
    std::size_t s = 0;
    double median_loss = 0.0;
    double benchmark = 0.0;  // s sqrt(log(e n / s))
    double ratio = 0.0;
};

std::vector<SweepRow> run_rate_sweep(ExperimentConfig cfg, const std::vector<std::size_t>& s_grid);

enum class CalibrationTarget { M1, M2, M3, kappa, C };

CalibrationTarget parse_calibration_target(const std::string& name);
std::string to_string(CalibrationTarget which);

struct CalibrationResult {
    CalibrationTarget which = CalibrationTarget::M1;
    double value = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double calibration_frequency = 0.0;
    double validation_frequency = 0.0;
};

/// Smallest value in [lo, hi] whose frequency is <= target, by bisection.
/// `frequency` must be non-increasing; a violation on a probe grid raises
/// CalibrationError, as does frequency(hi) > target.
template <class Frequency>
double bisect_constant(Frequency&& frequency, double lo, double hi, double target);

CalibrationResult calibrate(ExperimentConfig cfg, double target, CalibrationTarget which);

void write_report_csv(std::ostream& out, const std::vector<ReplicationRow>& rows);
std::vector<ReplicationRow> read_report_csv(std::istream& in);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

nlohmann::json report_summary(const ExperimentReport& report);

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<ChartSeries>& series);

}  // namespace qsparse

#include "qsparse/detail/bisect.hpp"
