#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qsparse/cli.hpp"
#include "qsparse/experiment.hpp"

using namespace qsparse;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = run_cli(args, in, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "qsparse_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string write(const std::string& name, const std::string& content) {
    const auto p = scratch(name);
    std::ofstream(p) << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

const char* kSmall = R"({"n": 60, "s": 3, "reps": 100, "seed": 3,
  "signal": {"class": "theta-C", "C": "auto"}})";

}  // namespace

TEST_CASE("fit reads stdin and prints the selection") {
    const auto r = cli({"fit", "--json", "--kappa", "1"}, "10, 0.1\n-0.2");
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("support") == nlohmann::json::array({1}));
    CHECK(j.at("criterion").get<double>() == doctest::Approx(1.5987).epsilon(1e-4));
    CHECK(j.at("theta_hat") == nlohmann::json::array({10.0, 0.0, 0.0}));
}

TEST_CASE("fit rejects malformed data") {
    CHECK(cli({"fit"}, "1 2 abc").code == kExitConfig);
    CHECK(cli({"fit"}, "").code == kExitConfig);
    CHECK(cli({"fit", "--tau", "1.2"}, "1 2").code == kExitConfig);
    CHECK(cli({"fit", "/nonexistent/file"}).code == kExitConfig);
}

TEST_CASE("oracle subcommand") {
    const auto theta = write("theta.txt", "10 0 0");
    const auto r = cli({"oracle", "--theta-file", theta, "--varkappa", "1", "--C", "1", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("oracle_rate").get<double>() == doctest::Approx(1.4487).epsilon(1e-4));
    CHECK(j.at("t_star").get<double>() == 0.0);
    CHECK(j.at("in_theta_c").get<bool>());
}

TEST_CASE("usage errors exit with the config status") {
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"frobnicate"}).code == kExitConfig);
    CHECK(cli({"simulate", "--config", "x.json"}).code == kExitConfig);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("config errors report a line number") {
    const auto cfg = write("bad.json", "{\n  \"n\": 10,\n  \"colour\": 1\n}");
    const auto r = cli({"simulate", "--config", cfg, "--out", scratch("bad.csv").string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("simulate writes a csv whose aggregates can be recomputed") {
    const auto cfg = write("small.json", kSmall);
    const auto csv = scratch("small.csv").string();
    const auto r = cli({"simulate", "--config", cfg, "--out", csv});
    REQUIRE(r.code == kExitOk);
    const auto summary = nlohmann::json::parse(r.out);
    std::ifstream f(csv);
    const auto rows = read_report_csv(f);
    CHECK(rows.size() == 100);
    Multipliers m{summary["multipliers"]["M1"], summary["multipliers"]["M2"], summary["multipliers"]["M3"]};
    const auto a = aggregate(rows, m);
    CHECK(a.exceedance == summary["aggregates"]["exceedance"].get<double>());
    CHECK(a.coverage == summary["aggregates"]["coverage"].get<double>());
    CHECK(a.median_loss == summary["aggregates"]["median_loss"].get<double>());
}

TEST_CASE("simulate output is independent of threads") {
    const auto cfg = write("det.json", kSmall);
    const auto a = scratch("det1.csv").string(), b = scratch("det8.csv").string();
    REQUIRE(cli({"--threads", "1", "simulate", "--config", cfg, "--out", a}).code == kExitOk);
    REQUIRE(cli({"--threads", "8", "simulate", "--config", cfg, "--out", b}).code == kExitOk);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("seed override from the environment") {
    const auto cfg = write("env.json", kSmall);
    const auto a = scratch("env_a.csv").string(), b = scratch("env_b.csv").string();
    REQUIRE(cli({"simulate", "--config", cfg, "--out", a}).code == kExitOk);
    ::setenv("QSPARSE_SEED", "999", 1);
    const int code = cli({"simulate", "--config", cfg, "--out", b}).code;
    ::setenv("QSPARSE_SEED", "x1", 1);
    const int bad = cli({"simulate", "--config", cfg, "--out", b}).code;
    ::unsetenv("QSPARSE_SEED");
    CHECK(code == kExitOk);
    CHECK(bad == kExitConfig);
    CHECK(slurp(a) != slurp(b));
}

TEST_CASE("calibrate, uq, sweep and verify-c1") {
    const auto cfg = write("all.json", kSmall);
    const auto cal = cli({"calibrate", "--config", cfg, "--which", "M1"});
    REQUIRE(cal.code == kExitOk);
    CHECK(nlohmann::json::parse(cal.out).at("which") == "M1");
    CHECK(cli({"calibrate", "--config", cfg, "--which", "M9"}).code == kExitConfig);

    const auto svg = scratch("uq.svg").string();
    const auto uq = cli({"uq", "--config", cfg, "--t-grid", "0,0.5", "--svg", svg});
    REQUIRE(uq.code == kExitOk);
    CHECK(nlohmann::json::parse(uq.out).size() == 2);
    CHECK(slurp(svg).rfind("<svg", 0) == 0);

    const auto sweep = cli({"sweep", "--config", cfg, "--s-grid", "1,2,4"});
    REQUIRE(sweep.code == kExitOk);
    CHECK(sweep.out.rfind("# qsparse-sweep v1\ns,median_loss,benchmark,ratio\n", 0) == 0);

    const auto c1cfg = write("c1.json", R"({"verify_c1": {"n": 16, "reps": 300}})");
    const auto v = cli({"verify-c1", "--config", c1cfg});
    REQUIRE(v.code == kExitOk);
    CHECK(nlohmann::json::parse(v.out).at("pass").get<bool>());

    const auto tcfg = write("t.json", R"({"noise": {"family": "student-t"}})");
    CHECK(cli({"verify-c1", "--config", tcfg}).code == kExitConfig);
}

TEST_CASE("numeric failures use their own status") {
    // A bracket whose top cannot reach the target makes calibration fail.
    const auto cfg = write("numfail.json", R"({"n": 60, "s": 3, "reps": 100,
        "constants": {"M1": 1e-9}, "signal": {"class": "l0-sparse", "magnitude": 8}})");
    const auto r = cli({"calibrate", "--config", cfg, "--which", "M1"});
    CHECK(r.code == kExitNumeric);
}
