#include "qsparse/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qsparse/confidence.hpp"
#include "qsparse/error.hpp"
#include "qsparse/experiment.hpp"
#include "qsparse/noise.hpp"
#include "qsparse/oracle.hpp"
#include "qsparse/selector.hpp"

namespace qsparse {

namespace {

using nlohmann::json;

Vector parse_reals(std::istream& in, const std::string& source) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    for (char& c : text)
        if (c == ',' || c == ';') c = ' ';
    std::istringstream tokens(text);
    Vector out;
    std::string tok;
    while (tokens >> tok) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(v))
            throw InvalidInput("non-numeric token '" + tok + "' in " + source);
        out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("no values found in " + source);
    return out;
}

Vector read_vector(const std::string& path, std::istream& fallback) {
    if (path.empty() || path == "-") return parse_reals(fallback, "stdin");
    std::ifstream file(path);
    if (!file) throw InvalidInput("cannot open '" + path + "'");
    return parse_reals(file, path);
}

// Gaussian theory preset at the given level.
ConstantSet gaussian_preset(const QuantileLevel& level) {
    const C1Constants c1 = subgaussian_c1_constants(level);
    return theory_constants(c1.M_xi, c1.alpha_xi, 2.0, level);
}

ExperimentConfig config_with_env(const std::string& path, unsigned threads) {
    ExperimentConfig cfg = load_config(path);
    if (const char* env = std::getenv("QSPARSE_SEED")) {
        char* end = nullptr;
        const unsigned long long seed = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError("QSPARSE_SEED is not an unsigned integer");
        cfg.seed = seed;
    }
    if (threads > 0) cfg.threads = threads;
    return cfg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InvalidInput("cannot write '" + path + "'");
    file << content;
}

json cells_json(const C1Report& report) {
    json cells = json::array();
    for (const auto& c : report.cells)
        cells.push_back({{"size", c.size}, {"M", c.M}, {"exceedances", c.exceedances}, {"reps", c.reps},
                         {"estimate", c.estimate}, {"upper_limit", c.upper_limit}, {"bound", c.bound},
                         {"resolvable", c.resolvable}, {"pass", c.pass}});
    return cells;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse quantile vector estimation, oracle rates and confidence balls"};
    app.name("qsparse");
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for replications (overrides config)");

    // fit
    auto* fit = app.add_subcommand("fit", "Select a sparsity pattern and estimate theta from data");
    std::string fit_input;
    double fit_tau = 0.5;
    std::optional<double> fit_kappa;
    bool fit_json = false;
    fit->add_option("input", fit_input, "Data file (whitespace/CSV separated reals); stdin if omitted");
    fit->add_option("--tau", fit_tau, "Quantile level in (0,1)");
    fit->add_option("--kappa", fit_kappa, "Selection penalty multiplier (default: gaussian theory preset)");
    fit->add_flag("--json", fit_json, "Emit JSON");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Oracle structure and rate of a known theta");
    std::string theta_file;
    double orc_tau = 0.5;
    std::optional<double> orc_varkappa;
    std::optional<double> orc_C;
    bool orc_json = false;
    orc->add_option("--theta-file", theta_file, "File holding theta")->required();
    orc->add_option("--tau", orc_tau, "Quantile level in (0,1)");
    orc->add_option("--varkappa", orc_varkappa, "Oracle penalty multiplier (default: gaussian theory preset)");
    orc->add_option("--C", orc_C, "Report membership in Theta(C)");
    orc->add_flag("--json", orc_json, "Emit JSON");

    // uq
    auto* uq = app.add_subcommand("uq", "Coverage and size study of the confidence ball");
    std::string uq_config, uq_out, uq_svg;
    std::vector<double> uq_t_grid;
    uq->add_option("--config", uq_config, "Experiment config (JSON)")->required();
    uq->add_option("--out", uq_out, "Replication CSV");
    uq->add_option("--t-grid", uq_t_grid, "Run at several EBR levels t")->delimiter(',');
    uq->add_option("--svg", uq_svg, "Coverage-vs-t chart (with --t-grid)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Estimation study; writes one CSV row per replication");
    std::string sim_config, sim_out;
    sim->add_option("--config", sim_config, "Experiment config (JSON)")->required();
    sim->add_option("--out", sim_out, "Replication CSV")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Monte Carlo calibration of one constant");
    std::string cal_config, cal_which = "M1";
    std::optional<double> cal_target;
    cal->add_option("--config", cal_config, "Experiment config (JSON)")->required();
    cal->add_option("--target", cal_target, "Target frequency in (0,1] (default: alpha1/alpha2)");
    cal->add_option("--which", cal_which, "M1, M2, M3, kappa or C")
        ->check(CLI::IsMember({"M1", "M2", "M3", "kappa", "C"}));

    // verify-c1
    auto* vc1 = app.add_subcommand("verify-c1", "Empirical check of the noise tail condition");
    std::string vc1_config;
    bool vc1_strict = false;
    vc1->add_option("--config", vc1_config, "Experiment config (JSON)")->required();
    vc1->add_flag("--strict", vc1_strict, "Exit with status 3 when the check fails");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Median loss against s sqrt(log(en/s)) over a grid of s");
    std::string sweep_config, sweep_out, sweep_svg;
    std::vector<std::size_t> s_grid;
    sweep->add_option("--config", sweep_config, "Experiment config (JSON)")->required();
    sweep->add_option("--s-grid", s_grid, "Sparsity levels")->delimiter(',')->required();
    sweep->add_option("--out", sweep_out, "Sweep CSV (stdout if omitted)");
    sweep->add_option("--svg", sweep_svg, "Loss-vs-s chart");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*fit) {
            const Vector x = read_vector(fit_input, in);
            const QuantileLevel level(fit_tau);
            const ConstantSet preset = gaussian_preset(level);
            const SelectorConfig sel(fit_kappa.value_or(preset.kappa), preset.varkappa);
            const Estimate est = estimate(x, level, sel);
            if (fit_json) {
                out << json{{"n", x.size()},
                            {"tau", fit_tau},
                            {"kappa", sel.kappa()},
                            {"support", est.selection.support.one_based()},
                            {"criterion", est.selection.criterion_value},
                            {"raw_radius", penalty(est.selection.support)},
                            {"theta_hat", est.theta_hat}}
                           .dump(2)
                    << '\n';
            } else {
                out << "kappa " << sel.kappa() << '\n' << "support";
                for (auto i : est.selection.support.one_based()) out << ' ' << i;
                out << "\ncriterion " << est.selection.criterion_value << "\ntheta_hat";
                for (double v : est.theta_hat) out << ' ' << v;
                out << '\n';
            }
        } else if (*orc) {
            const Vector theta = read_vector(theta_file, in);
            const QuantileLevel level(orc_tau);
            const ConstantSet preset = gaussian_preset(level);
            const SelectorConfig sel(preset.kappa, orc_varkappa.value_or(preset.varkappa));
            const OracleResult r = oracle(theta, level, sel);
            json j{{"varkappa", sel.varkappa()},
                   {"oracle_support", r.oracle_support.one_based()},
                   {"true_support", true_support(theta).one_based()},
                   {"oracle_rate", r.oracle_rate},
                   {"residual", r.residual},
                   {"penalty_part", r.penalty_part},
                   {"oracle_vs_true", oracle_vs_true_check(theta, level, sel)}};
            const double t_star = ebr_t_star(r);
            j["t_star"] = std::isfinite(t_star) ? json(t_star) : json("inf");
            if (orc_C) j["in_theta_c"] = in_theta_c(theta, *orc_C);
            if (orc_json) {
                out << j.dump(2) << '\n';
            } else {
                for (const auto& [key, value] : j.items()) out << key << ' ' << value.dump() << '\n';
            }
        } else if (*sim) {
            const ExperimentReport report = run_estimation(config_with_env(sim_config, threads));
            std::ostringstream csv;
            write_report_csv(csv, report.rows);
            write_file(sim_out, csv.str());
            out << report_summary(report).dump(2) << '\n';
        } else if (*uq) {
            ExperimentConfig cfg = config_with_env(uq_config, threads);
            if (uq_t_grid.empty()) {
                const ExperimentReport report = run_uq(cfg);
                if (!uq_out.empty()) {
                    std::ostringstream csv;
                    write_report_csv(csv, report.rows);
                    write_file(uq_out, csv.str());
                }
                out << report_summary(report).dump(2) << '\n';
            } else {
                json runs = json::array();
                ChartSeries coverage{"coverage", {}, {}};
                for (double t : uq_t_grid) {
                    ExperimentConfig local = cfg;
                    local.t = t;
                    const ExperimentReport report = run_uq(local);
                    runs.push_back({{"t", t}, {"summary", report_summary(report)}});
                    coverage.x.push_back(t);
                    coverage.y.push_back(report.aggregates.coverage);
                }
                if (!uq_svg.empty())
                    write_file(uq_svg, svg_line_chart("Coverage of the confidence ball", "EBR level t",
                                                      "coverage frequency", {coverage}));
                out << runs.dump(2) << '\n';
            }
        } else if (*cal) {
            const ExperimentConfig cfg = config_with_env(cal_config, threads);
            const CalibrationTarget which = parse_calibration_target(cal_which);
            const double target = cal_target.value_or(which == CalibrationTarget::M3 ? cfg.alpha2 : cfg.alpha1);
            const CalibrationResult r = calibrate(cfg, target, which);
            out << json{{"which", to_string(r.which)},
                        {"target", target},
                        {"value", r.value},
                        {"bracket", {r.bracket_lo, r.bracket_hi}},
                        {"calibration_frequency", r.calibration_frequency},
                        {"validation_frequency", r.validation_frequency}}
                       .dump(2)
                << '\n';
        } else if (*vc1) {
            const ExperimentConfig cfg = config_with_env(vc1_config, threads);
            const QuantileLevel level = cfg.level();
            const C1Constants c1 = resolve_c1(cfg);
            const C1Report report = verify_c1(cfg.noise, level, cfg.c1_n, c1.M_xi, c1.alpha_xi, cfg.H_xi,
                                              cfg.c1_reps, cfg.seed);
            out << json{{"family", to_string(cfg.noise.family)},
                        {"tau", cfg.tau},
                        {"M_xi", c1.M_xi},
                        {"alpha_xi", c1.alpha_xi},
                        {"H_xi", cfg.H_xi},
                        {"pass", report.pass},
                        {"cells", cells_json(report)}}
                       .dump(2)
                << '\n';
            if (vc1_strict && !report.pass) return kExitNumeric;
        } else if (*sweep) {
            const ExperimentConfig cfg = config_with_env(sweep_config, threads);
            const auto rows = run_rate_sweep(cfg, s_grid);
            std::ostringstream csv;
            write_sweep_csv(csv, rows);
            if (sweep_out.empty())
                out << csv.str();
            else
                write_file(sweep_out, csv.str());
            if (!sweep_svg.empty()) {
                ChartSeries ratio{"median loss / s sqrt(log(en/s))", {}, {}};
                for (const auto& r : rows) {
                    ratio.x.push_back(static_cast<double>(r.s));
                    ratio.y.push_back(r.ratio);
                }
                write_file(sweep_svg, svg_line_chart("Loss relative to the sparsity rate", "s",
                                                     "ratio", {ratio}));
            }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace qsparse
