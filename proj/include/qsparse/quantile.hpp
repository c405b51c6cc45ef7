#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qsparse {

using Vector = std::vector<double>;

/// A quantile level tau in (0,1) together with the two asymmetry constants
/// c_tau = max(tau, 1 - tau) and C_tau = c_tau / (1 - c_tau).
class QuantileLevel {
public:
    explicit QuantileLevel(double tau);

    double tau() const noexcept { return tau_; }
    double c() const noexcept { return c_; }
    double C() const noexcept { return C_; }

    /// Loss contribution of a single coordinate.
    double rho(double x) const noexcept {
        return x > 0.0 ? tau_ * x : (tau_ - 1.0) * x;
    }

private:
    double tau_;
    double c_;
    double C_;
};

/// A sparsity pattern I over [n]. Stored 0-based and sorted; the external
/// (file, CLI, JSON) form is 1-based.
class SupportSet {
public:
    SupportSet() = default;
    explicit SupportSet(std::size_t n) : n_(n) {}

    static SupportSet from_zero_based(std::size_t n, std::vector<std::size_t> indices);
    static SupportSet from_one_based(std::size_t n, const std::vector<std::size_t>& indices);
    static SupportSet full(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return idx_.size(); }
    bool empty() const noexcept { return idx_.empty(); }
    const std::vector<std::size_t>& indices() const noexcept { return idx_; }
    std::vector<std::size_t> one_based() const;

    bool contains(std::size_t i) const;
    SupportSet complement() const;

    friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> idx_;
};

/// Neumaier-compensated sum accumulated in long double.
long double accurate_sum(std::span<const double> values);

/// rho_tau(x) = sum_i x_i (tau - 1{x_i <= 0}). Throws InvalidInput on empty x.
double rho(const QuantileLevel& level, std::span<const double> x);

/// l1 norm |x| = sum |x_i|.
double l1_norm(std::span<const double> x);

/// Quantile projection onto L_I: keeps x_i for i in I, zeroes the rest.
Vector project(std::span<const double> x, const SupportSet& support);

/// lambda(s) = s log(e n / s), with lambda(0) = 0.
double complexity(std::size_t s, std::size_t n);
/// Signed overload so callers can pass unchecked integers; rejects s < 0.
double complexity(long long s, long long n);

/// p(I) = |I| sqrt(log(e n / |I|)); this is the size-only form.
double penalty_of_size(std::size_t size, std::size_t n);
double penalty(const SupportSet& support);

struct ComplexitySum {
    double sum;
    double bound;
};

/// Exact sum over all nonempty I of exp(-nu lambda(|I|)) for n <= 30, and
/// the closed-form bound (e^{nu-1} - 1)^{-1}.
ComplexitySum complexity_sum_bound(std::size_t n, double nu);

}  // namespace qsparse
