#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qsparse/error.hpp"
#include "qsparse/experiment.hpp"

namespace qsparse {

namespace {

using nlohmann::json;

std::size_t line_at_byte(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the first occurrence of "key" in the document; 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_at_byte(text, pos);
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(what, line_of_key(text_, key));
    }

    void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) const {
        for (const auto& [key, value] : obj.items())
            if (!allowed.count(key)) fail(key, "unknown key '" + key + "' in " + where);
    }

    double number(const json& obj, const std::string& key, double fallback) const {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_number()) fail(key, "'" + key + "' must be a number");
        return v.get<double>();
    }

    std::size_t count(const json& obj, const std::string& key, std::size_t fallback) const {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            fail(key, "'" + key + "' must be a nonnegative integer");
        return v.get<std::size_t>();
    }

    std::vector<double> numbers(const json& obj, const std::string& key) const {
        if (!obj.contains(key)) return {};
        const json& v = obj.at(key);
        if (!v.is_array()) fail(key, "'" + key + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "'" + key + "' must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string string(const json& obj, const std::string& key, const std::string& fallback) const {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_string()) fail(key, "'" + key + "' must be a string");
        return v.get<std::string>();
    }

    const json& object(const json& obj, const std::string& key) const {
        const json& v = obj.at(key);
        if (!v.is_object()) fail(key, "'" + key + "' must be an object");
        return v;
    }

private:
    const std::string& text_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), line_at_byte(text, e.byte));
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object", 1);

    Reader r(text);
    r.only_keys(doc, "config",
                {"n", "s", "tau", "noise", "signal", "constants", "c1", "reps", "seed", "threads",
                 "targets", "t", "resample_theta", "verify_c1"});

    ExperimentConfig cfg;
    cfg.n = r.count(doc, "n", cfg.n);
    cfg.s = r.count(doc, "s", cfg.s);
    cfg.tau = r.number(doc, "tau", cfg.tau);
    cfg.reps = r.count(doc, "reps", cfg.reps);
    cfg.seed = r.count(doc, "seed", cfg.seed);
    cfg.threads = static_cast<unsigned>(r.count(doc, "threads", cfg.threads));
    cfg.t = r.number(doc, "t", cfg.t);
    if (doc.contains("resample_theta")) {
        if (!doc["resample_theta"].is_boolean()) r.fail("resample_theta", "'resample_theta' must be a boolean");
        cfg.resample_theta = doc["resample_theta"].get<bool>();
    }

    if (cfg.n == 0) r.fail("n", "'n' must be >= 1");
    if (cfg.s > cfg.n) r.fail("s", "'s' must not exceed n");
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) r.fail("tau", "'tau' must lie in (0,1)");
    if (cfg.reps == 0) r.fail("reps", "'reps' must be >= 1");
    if (cfg.threads == 0) cfg.threads = 1;
    if (!(cfg.t >= 0.0)) r.fail("t", "'t' must be >= 0");

    if (doc.contains("noise")) {
        const json& nz = r.object(doc, "noise");
        r.only_keys(nz, "noise", {"family", "sigma", "weights", "means", "sds", "scale", "df", "rho_corr"});
        try {
            cfg.noise.family = parse_noise_family(r.string(nz, "family", "gaussian"));
        } catch (const InvalidInput& e) {
            r.fail("family", e.what());
        }
        cfg.noise.sigma = r.number(nz, "sigma", 1.0);
        cfg.noise.weights = r.numbers(nz, "weights");
        cfg.noise.means = r.numbers(nz, "means");
        cfg.noise.sds = r.numbers(nz, "sds");
        cfg.noise.scale = r.number(nz, "scale", cfg.noise.scale);
        cfg.noise.df = r.number(nz, "df", cfg.noise.df);
        cfg.noise.rho_corr = r.number(nz, "rho_corr", cfg.noise.rho_corr);
        try {
            cfg.noise.validate();
        } catch (const InvalidInput& e) {
            r.fail("noise", e.what());
        }
    }

    cfg.signal.n = cfg.n;
    cfg.signal.s = cfg.s;
    if (doc.contains("signal")) {
        const json& sg = r.object(doc, "signal");
        r.only_keys(sg, "signal", {"class", "s", "magnitude", "C", "ratio"});
        try {
            cfg.signal.cls = parse_signal_class(r.string(sg, "class", "l0-sparse"));
        } catch (const InvalidInput& e) {
            r.fail("class", e.what());
        }
        cfg.signal.s = r.count(sg, "s", cfg.s);
        cfg.signal.magnitude = r.number(sg, "magnitude", cfg.signal.magnitude);
        cfg.signal.ratio = r.number(sg, "ratio", cfg.signal.ratio);
        if (sg.contains("C")) {
            if (sg["C"].is_string() && sg["C"].get<std::string>() == "auto")
                cfg.signal_c_auto = true;
            else
                cfg.signal.C = r.number(sg, "C", cfg.signal.C);
        }
        try {
            cfg.signal.validate();
        } catch (const InvalidInput& e) {
            r.fail("signal", e.what());
        }
        if (cfg.signal_c_auto && cfg.signal.cls != SignalClass::theta_c)
            r.fail("C", "\"C\": \"auto\" applies only to the theta-C class");
    }

    if (doc.contains("constants")) {
        const json& c = doc["constants"];
        if (c.is_string()) {
            const auto mode = c.get<std::string>();
            if (mode == "theory")
                cfg.constants_mode = ConstantsMode::theory;
            else if (mode == "calibrated")
                cfg.constants_mode = ConstantsMode::calibrated;
            else
                r.fail("constants", "'constants' must be \"theory\", \"calibrated\" or an object");
        } else if (c.is_object()) {
            cfg.constants_mode = ConstantsMode::explicit_values;
            for (const auto& [key, value] : c.items()) {
                if (!value.is_number()) r.fail(key, "explicit constant '" + key + "' must be a number");
                cfg.constant_overrides[key] = value.get<double>();
            }
        } else {
            r.fail("constants", "'constants' must be \"theory\", \"calibrated\" or an object");
        }
    }

    if (doc.contains("c1")) {
        const json& c1 = r.object(doc, "c1");
        r.only_keys(c1, "c1", {"M_xi", "alpha_xi", "H_xi"});
        cfg.H_xi = r.number(c1, "H_xi", cfg.H_xi);
        if (c1.contains("M_xi") || c1.contains("alpha_xi")) {
            if (!c1.contains("M_xi") || !c1.contains("alpha_xi"))
                r.fail("c1", "'c1' needs both M_xi and alpha_xi");
            cfg.c1 = C1Constants{r.number(c1, "M_xi", 0.0), r.number(c1, "alpha_xi", 0.0)};
            if (!(cfg.c1->M_xi > 0.0) || !(cfg.c1->alpha_xi > 0.0))
                r.fail("c1", "C1 constants must be positive");
        }
        if (!(cfg.H_xi > 0.0)) r.fail("H_xi", "'H_xi' must be positive");
    }

    if (doc.contains("targets")) {
        const json& tg = r.object(doc, "targets");
        r.only_keys(tg, "targets", {"alpha1", "alpha2"});
        cfg.alpha1 = r.number(tg, "alpha1", cfg.alpha1);
        cfg.alpha2 = r.number(tg, "alpha2", cfg.alpha2);
        if (!(cfg.alpha1 > 0.0 && cfg.alpha1 <= 1.0)) r.fail("alpha1", "'alpha1' must lie in (0,1]");
        if (!(cfg.alpha2 > 0.0 && cfg.alpha2 <= 1.0)) r.fail("alpha2", "'alpha2' must lie in (0,1]");
    }

    if (doc.contains("verify_c1")) {
        const json& vc = r.object(doc, "verify_c1");
        r.only_keys(vc, "verify_c1", {"n", "reps"});
        cfg.c1_n = r.count(vc, "n", cfg.c1_n);
        cfg.c1_reps = r.count(vc, "reps", cfg.c1_reps);
        if (cfg.c1_n == 0 || cfg.c1_reps == 0) r.fail("verify_c1", "verify_c1 n and reps must be >= 1");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace qsparse
