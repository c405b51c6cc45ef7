#include "qsparse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "qsparse/error.hpp"
#include "qsparse/stats.hpp"

namespace qsparse {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

std::string to_string(NoiseFamily family) {
    switch (family) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::gaussian_mixture: return "gaussian-mixture";
        case NoiseFamily::laplace: return "laplace";
        case NoiseFamily::student_t: return "student-t";
        case NoiseFamily::ar1_gaussian: return "ar1-gaussian";
    }
    return "unknown";
}

NoiseFamily parse_noise_family(const std::string& name) {
    for (auto f : {NoiseFamily::gaussian, NoiseFamily::gaussian_mixture, NoiseFamily::laplace,
                   NoiseFamily::student_t, NoiseFamily::ar1_gaussian})
        if (to_string(f) == name) return f;
    throw InvalidInput("unknown noise family '" + name + "'");
}

NoiseSpec NoiseSpec::gaussian(double sigma) {
    NoiseSpec s;
    s.sigma = sigma;
    return s;
}

NoiseSpec NoiseSpec::mixture(std::vector<double> weights, std::vector<double> means,
                             std::vector<double> sds, double sigma) {
    NoiseSpec s;
    s.family = NoiseFamily::gaussian_mixture;
    s.weights = std::move(weights);
    s.means = std::move(means);
    s.sds = std::move(sds);
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::laplace(double scale, double sigma) {
    NoiseSpec s;
    s.family = NoiseFamily::laplace;
    s.scale = scale;
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::student_t(double df, double sigma) {
    NoiseSpec s;
    s.family = NoiseFamily::student_t;
    s.df = df;
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::ar1(double rho_corr, double sigma) {
    NoiseSpec s;
    s.family = NoiseFamily::ar1_gaussian;
    s.rho_corr = rho_corr;
    s.sigma = sigma;
    s.validate();
    return s;
}

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("noise sigma must be >= 0");
    switch (family) {
        case NoiseFamily::gaussian: break;
        case NoiseFamily::gaussian_mixture: {
            if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
                throw InvalidInput("gaussian-mixture needs equally many weights, means and sds");
            double total = 0.0;
            for (std::size_t k = 0; k < weights.size(); ++k) {
                if (!(weights[k] > 0.0)) throw InvalidInput("mixture weights must be positive");
                if (!(sds[k] > 0.0)) throw InvalidInput("mixture sds must be positive");
                total += weights[k];
            }
            if (std::fabs(total - 1.0) > 1e-9) throw InvalidInput("mixture weights must sum to 1");
            break;
        }
        case NoiseFamily::laplace:
            if (!(scale > 0.0)) throw InvalidInput("laplace scale must be positive");
            break;
        case NoiseFamily::student_t:
            if (!(df > 0.0)) throw InvalidInput("student-t df must be positive");
            break;
        case NoiseFamily::ar1_gaussian:
            if (!(rho_corr > -1.0 && rho_corr < 1.0))
                throw InvalidInput("ar1 correlation must lie in (-1, 1)");
            break;
    }
}

double base_cdf(const NoiseSpec& spec, double z) {
    switch (spec.family) {
        case NoiseFamily::gaussian:
        case NoiseFamily::ar1_gaussian: return std_normal_cdf(z);
        case NoiseFamily::gaussian_mixture: {
            double p = 0.0;
            for (std::size_t k = 0; k < spec.weights.size(); ++k)
                p += spec.weights[k] * std_normal_cdf((z - spec.means[k]) / spec.sds[k]);
            return p;
        }
        case NoiseFamily::laplace:
            return z < 0.0 ? 0.5 * std::exp(z / spec.scale) : 1.0 - 0.5 * std::exp(-z / spec.scale);
        case NoiseFamily::student_t:
            return boost::math::cdf(boost::math::students_t(spec.df), z);
    }
    return 0.0;
}

double base_pdf(const NoiseSpec& spec, double z) {
    switch (spec.family) {
        case NoiseFamily::gaussian:
        case NoiseFamily::ar1_gaussian: return std_normal_pdf(z);
        case NoiseFamily::gaussian_mixture: {
            double p = 0.0;
            for (std::size_t k = 0; k < spec.weights.size(); ++k)
                p += spec.weights[k] * std_normal_pdf((z - spec.means[k]) / spec.sds[k]) / spec.sds[k];
            return p;
        }
        case NoiseFamily::laplace: return std::exp(-std::fabs(z) / spec.scale) / (2.0 * spec.scale);
        case NoiseFamily::student_t: return boost::math::pdf(boost::math::students_t(spec.df), z);
    }
    return 0.0;
}

double quantile_shift(const NoiseSpec& spec, const QuantileLevel& level) {
    spec.validate();
    const double tau = level.tau();
    if (spec.family == NoiseFamily::laplace)
        return tau < 0.5 ? spec.scale * std::log(2.0 * tau) : -spec.scale * std::log(2.0 * (1.0 - tau));

    double lo = -1.0;
    double hi = 1.0;
    int doublings = 0;
    while (base_cdf(spec, lo) > tau) {
        lo *= 2.0;
        if (++doublings > 200) throw NumericError("quantile_shift: lower bracket did not close");
    }
    doublings = 0;
    while (base_cdf(spec, hi) < tau) {
        hi *= 2.0;
        if (++doublings > 200) throw NumericError("quantile_shift: upper bracket did not close");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (base_cdf(spec, mid) < tau)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void sample_noise_into(const NoiseSpec& spec, double shift, Engine& engine, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    switch (spec.family) {
        case NoiseFamily::gaussian:
            for (auto& v : out) v = normal(engine);
            break;
        case NoiseFamily::gaussian_mixture: {
            std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
            for (auto& v : out) {
                const std::size_t k = pick(engine);
                v = spec.means[k] + spec.sds[k] * normal(engine);
            }
            break;
        }
        case NoiseFamily::laplace: {
            std::exponential_distribution<double> expo(1.0 / spec.scale);
            std::bernoulli_distribution coin(0.5);
            for (auto& v : out) v = coin(engine) ? expo(engine) : -expo(engine);
            break;
        }
        case NoiseFamily::student_t: {
            std::student_t_distribution<double> t(spec.df);
            for (auto& v : out) v = t(engine);
            break;
        }
        case NoiseFamily::ar1_gaussian: {
            const double innovation = std::sqrt(1.0 - spec.rho_corr * spec.rho_corr);
            double prev = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) {
                prev = i == 0 ? normal(engine) : spec.rho_corr * prev + innovation * normal(engine);
                out[i] = prev;
            }
            break;
        }
    }
    for (auto& v : out) v = spec.sigma * (v - shift);
}

Vector sample_noise(const NoiseSpec& spec, const QuantileLevel& level, std::size_t n,
                    std::uint64_t seed) {
    if (n == 0) throw InvalidInput("sample_noise: n must be >= 1");
    const double shift = quantile_shift(spec, level);
    Engine engine = make_engine(seed);
    Vector out(n);
    sample_noise_into(spec, shift, engine, out);
    return out;
}

C1Constants subgaussian_c1_constants(const QuantileLevel& level, double c0) {
    if (!(c0 > 0.0)) throw InvalidInput("sub-Gaussian constant c0 must be positive");
    return {level.c() * std::sqrt(std::numbers::ln2 / c0), c0 / (level.c() * level.c())};
}

namespace {

// E exp(c W^2) for W ~ N(m, s^2); infinite when 2 c s^2 >= 1.
double gaussian_square_mgf(double c, double m, double s) {
    const double d = 1.0 - 2.0 * c * s * s;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(c * m * m / d) / std::sqrt(d);
}

}  // namespace

double subgaussian_c0(const NoiseSpec& spec, const QuantileLevel& level) {
    spec.validate();
    if (spec.family == NoiseFamily::laplace || spec.family == NoiseFamily::student_t)
        throw NumericError(to_string(spec.family) + " noise has no sub-Gaussian constant");

    const double q = quantile_shift(spec, level);
    auto mgf = [&](double c) {
        if (spec.family == NoiseFamily::gaussian_mixture) {
            double total = 0.0;
            for (std::size_t k = 0; k < spec.weights.size(); ++k)
                total += spec.weights[k] * gaussian_square_mgf(c, spec.means[k] - q, spec.sds[k]);
            return total;
        }
        return gaussian_square_mgf(c, -q, 1.0);
    };
    // mgf is increasing in c with mgf(0) = 1.
    double lo = 0.0;
    double hi = 1.0;
    while (mgf(hi) <= 2.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mgf(mid) <= 2.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

C1Report verify_c1(const NoiseSpec& spec, const QuantileLevel& level, std::size_t n, double M_xi,
                   double alpha_xi, double H_xi, std::size_t reps, std::uint64_t seed) {
    if (n == 0) throw InvalidInput("verify_c1: n must be >= 1");
    if (reps == 0) throw InvalidInput("verify_c1: reps must be >= 1");

    std::vector<std::size_t> sizes{0};
    for (std::size_t s = 1; s < n; s *= 2) sizes.push_back(s);
    sizes.push_back(n);
    const std::vector<double> Ms{0.0, 1.0, 2.0, 4.0, 8.0};

    // One random support per size, drawn from its own stream.
    Engine support_engine = make_engine(seed, 0);
    std::vector<std::vector<std::size_t>> supports;
    for (std::size_t s : sizes) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = 0; i < s; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(perm[i], perm[pick(support_engine)]);
        }
        perm.resize(s);
        supports.push_back(std::move(perm));
    }

    std::vector<std::size_t> counts(sizes.size() * Ms.size(), 0);
    const double shift = quantile_shift(spec, level);
    Vector xi(n);
    for (std::size_t r = 0; r < reps; ++r) {
        Engine engine = make_engine(seed, r + 1);
        sample_noise_into(spec, shift, engine, xi);
        for (std::size_t a = 0; a < sizes.size(); ++a) {
            long double loss = 0.0L;
            for (std::size_t i : supports[a]) loss += level.rho(xi[i]);
            const double sz = static_cast<double>(sizes[a]);
            const double base = M_xi * penalty_of_size(sizes[a], n);
            for (std::size_t b = 0; b < Ms.size(); ++b) {
                const double threshold = base + std::sqrt(sz * Ms[b]);
                if (static_cast<double>(loss) > threshold) ++counts[a * Ms.size() + b];
            }
        }
    }

    const double zero_count_limit = binomial_upper_limit(0, reps);
    C1Report report;
    report.pass = true;
    for (std::size_t a = 0; a < sizes.size(); ++a) {
        for (std::size_t b = 0; b < Ms.size(); ++b) {
            C1Cell cell;
            cell.size = sizes[a];
            cell.M = Ms[b];
            cell.reps = reps;
            cell.exceedances = counts[a * Ms.size() + b];
            cell.estimate = static_cast<double>(cell.exceedances) / static_cast<double>(reps);
            cell.upper_limit = binomial_upper_limit(cell.exceedances, reps);
            cell.bound = H_xi * std::exp(-alpha_xi * cell.M);
            cell.resolvable = cell.bound >= zero_count_limit;
            if (cell.bound >= 1.0)
                cell.pass = true;
            else if (cell.resolvable)
                cell.pass = cell.upper_limit <= cell.bound;
            else
                cell.pass = cell.exceedances == 0;
            report.pass = report.pass && cell.pass;
            report.cells.push_back(cell);
        }
    }
    return report;
}

std::string to_string(SignalClass cls) {
    switch (cls) {
        case SignalClass::l0_sparse: return "l0-sparse";
        case SignalClass::theta_c: return "theta-C";
        case SignalClass::geometric_decay: return "geometric-decay";
    }
    return "unknown";
}

SignalClass parse_signal_class(const std::string& name) {
    for (auto c : {SignalClass::l0_sparse, SignalClass::theta_c, SignalClass::geometric_decay})
        if (to_string(c) == name) return c;
    throw InvalidInput("unknown signal class '" + name + "'");
}

void SignalSpec::validate() const {
    if (n == 0) throw InvalidInput("signal dimension must be >= 1");
    if (s > n) throw InvalidInput("signal sparsity s exceeds n");
    if (cls == SignalClass::theta_c && !(C >= 0.0)) throw InvalidInput("theta-C needs C >= 0");
    if (cls == SignalClass::geometric_decay && !(ratio >= 0.0 && ratio < 1.0))
        throw InvalidInput("geometric-decay ratio must lie in [0, 1)");
    if (!std::isfinite(magnitude)) throw InvalidInput("signal magnitude must be finite");
}

double SignalSpec::theta_c_magnitude() const {
    if (s == 0) return 0.0;
    return C * std::sqrt(1.0 + std::log(static_cast<double>(n) / static_cast<double>(s)));
}

Vector sample_signal(const SignalSpec& spec, Engine& engine) {
    spec.validate();
    const std::size_t n = spec.n;
    // Partial Fisher-Yates: perm[0..n) is a uniformly random ordering of positions.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const std::size_t placed = spec.cls == SignalClass::geometric_decay ? n : spec.s;
    for (std::size_t i = 0; i < placed && i + 1 < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(perm[i], perm[pick(engine)]);
    }
    std::bernoulli_distribution coin(0.5);

    Vector theta(n, 0.0);
    const double head = spec.cls == SignalClass::theta_c ? spec.theta_c_magnitude() : spec.magnitude;
    for (std::size_t k = 0; k < placed; ++k) {
        double mag = head;
        if (k >= spec.s) mag = spec.magnitude * std::pow(spec.ratio, static_cast<double>(k - spec.s + 1));
        theta[perm[k]] = coin(engine) ? mag : -mag;
    }
    return theta;
}

Vector sample_signal(const SignalSpec& spec, std::uint64_t seed) {
    Engine engine = make_engine(seed);
    return sample_signal(spec, engine);
}

}  // namespace qsparse
