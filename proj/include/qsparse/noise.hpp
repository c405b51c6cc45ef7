#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qsparse/quantile.hpp"
#include "qsparse/rng.hpp"

namespace qsparse {

enum class NoiseFamily { gaussian, gaussian_mixture, laplace, student_t, ar1_gaussian };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& name);

/// Noise law xi = sigma (Z - q_tau), where Z is the base variable of the
/// family and q_tau its tau-quantile, so that P(xi <= 0) = tau.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double sigma = 1.0;  // 0 is accepted as the noiseless limit

    // gaussian-mixture
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sds;
    // laplace
    double scale = 1.0;
    // student-t
    double df = 3.0;
    // ar1-gaussian
    double rho_corr = 0.5;

    static NoiseSpec gaussian(double sigma = 1.0);
    static NoiseSpec mixture(std::vector<double> weights, std::vector<double> means,
                             std::vector<double> sds, double sigma = 1.0);
    static NoiseSpec laplace(double scale, double sigma = 1.0);
    static NoiseSpec student_t(double df, double sigma = 1.0);
    static NoiseSpec ar1(double rho_corr, double sigma = 1.0);

    /// Throws InvalidInput on out-of-range family parameters.
    void validate() const;
};

/// CDF and density of the base variable Z (before centering and scaling).
double base_cdf(const NoiseSpec& spec, double z);
double base_pdf(const NoiseSpec& spec, double z);

/// q with P(Z <= q) = tau. Closed form for laplace, bisection on the CDF to
/// 1e-10 otherwise.
double quantile_shift(const NoiseSpec& spec, const QuantileLevel& level);

/// Draws n centered noise values; deterministic in (spec, level, n, seed).
Vector sample_noise(const NoiseSpec& spec, const QuantileLevel& level, std::size_t n,
                    std::uint64_t seed);

/// Same, drawing from a caller-owned stream with a precomputed shift.
void sample_noise_into(const NoiseSpec& spec, double shift, Engine& engine, std::span<double> out);

struct C1Constants {
    double M_xi;
    double alpha_xi;
};

inline constexpr double kStandardNormalC0 = 0.375;

/// Tail-condition constants implied by sub-Gaussian tails with E exp(c0 W^2) <= 2:
/// M_xi = c_tau sqrt(log 2 / c0), alpha_xi = c0 / c_tau^2.
C1Constants subgaussian_c1_constants(const QuantileLevel& level, double c0 = kStandardNormalC0);

/// Largest c0 with E exp(c0 (Z - q_tau)^2) <= 2 for the unit-scale centered
/// noise. Closed form for the gaussian families; throws NumericError for
/// families without sub-Gaussian tails.
double subgaussian_c0(const NoiseSpec& spec, const QuantileLevel& level);

struct C1Cell {
    std::size_t size = 0;
    double M = 0.0;
    std::size_t exceedances = 0;
    std::size_t reps = 0;
    double estimate = 0.0;
    double upper_limit = 0.0;  // one-sided 95% Clopper-Pearson
    double bound = 0.0;        // H_xi exp(-alpha_xi M)
    bool resolvable = true;    // false when even zero exceedances cannot certify the bound
    bool pass = false;
};

struct C1Report {
    std::vector<C1Cell> cells;
    bool pass = false;
};

/// Monte Carlo check of P(rho(P_I xi) > M_xi p(I) + |I|^{1/2} M^{1/2}) <= H_xi e^{-alpha_xi M}
/// on a size grid {0, 1, 2, 4, ..., n} x M in {0, 1, 2, 4, 8}.
C1Report verify_c1(const NoiseSpec& spec, const QuantileLevel& level, std::size_t n, double M_xi,
                   double alpha_xi, double H_xi, std::size_t reps, std::uint64_t seed);

enum class SignalClass { l0_sparse, theta_c, geometric_decay };

std::string to_string(SignalClass cls);
SignalClass parse_signal_class(const std::string& name);

struct SignalSpec {
    SignalClass cls = SignalClass::l0_sparse;
    std::size_t n = 1;
    std::size_t s = 0;        // l0-sparse / theta-C support size; s_eff for geometric-decay
    double magnitude = 1.0;   // l0-sparse and geometric-decay head magnitude
    double C = 1.0;           // theta-C
    double ratio = 0.5;       // geometric-decay tail ratio

    void validate() const;
    /// Entry magnitude of a theta-C draw: C sqrt(log(e n / s)).
    double theta_c_magnitude() const;
};

/// l0-sparse: exactly s entries of magnitude `magnitude` with random signs at
/// uniformly random positions. theta-C: same with magnitude C sqrt(log(en/s)).
/// geometric-decay: s entries of magnitude `magnitude`, the remaining n - s
/// entries decay as magnitude * ratio^k, k = 1..n-s, all at random positions.
Vector sample_signal(const SignalSpec& spec, std::uint64_t seed);
Vector sample_signal(const SignalSpec& spec, Engine& engine);

}  // namespace qsparse
