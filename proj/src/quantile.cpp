#include "qsparse/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsparse/error.hpp"

namespace qsparse {

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw InvalidInput("quantile level must lie in (0,1), got " + std::to_string(tau));
    c_ = std::max(tau, 1.0 - tau);
    C_ = c_ / (1.0 - c_);
}

SupportSet SupportSet::from_zero_based(std::size_t n, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw InvalidInput("support set contains duplicate indices");
    if (!indices.empty() && indices.back() >= n)
        throw InvalidInput("support index exceeds dimension " + std::to_string(n));
    SupportSet out(n);
    out.idx_ = std::move(indices);
    return out;
}

SupportSet SupportSet::from_one_based(std::size_t n, const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> zero;
    zero.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i == 0) throw InvalidInput("support indices are 1-based; got 0");
        zero.push_back(i - 1);
    }
    return from_zero_based(n, std::move(zero));
}

SupportSet SupportSet::full(std::size_t n) {
    SupportSet out(n);
    out.idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.idx_[i] = i;
    return out;
}

std::vector<std::size_t> SupportSet::one_based() const {
    std::vector<std::size_t> out(idx_);
    for (auto& i : out) ++i;
    return out;
}

bool SupportSet::contains(std::size_t i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
}

SupportSet SupportSet::complement() const {
    SupportSet out(n_);
    out.idx_.reserve(n_ - idx_.size());
    auto it = idx_.begin();
    for (std::size_t i = 0; i < n_; ++i) {
        if (it != idx_.end() && *it == i)
            ++it;
        else
            out.idx_.push_back(i);
    }
    return out;
}

long double accurate_sum(std::span<const double> values) {
    long double sum = 0.0L;
    long double carry = 0.0L;
    for (double v : values) {
        const long double x = v;
        const long double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    return sum + carry;
}

double rho(const QuantileLevel& level, std::span<const double> x) {
    if (x.empty()) throw InvalidInput("rho: empty vector");
    long double sum = 0.0L;
    long double carry = 0.0L;
    for (double xi : x) {
        const long double v = level.rho(xi);
        const long double t = sum + v;
        carry += (sum >= v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return static_cast<double>(sum + carry);
}

double l1_norm(std::span<const double> x) {
    long double sum = 0.0L;
    for (double xi : x) sum += std::fabs(static_cast<long double>(xi));
    return static_cast<double>(sum);
}

Vector project(std::span<const double> x, const SupportSet& support) {
    if (support.n() != x.size())
        throw InvalidInput("project: support dimension " + std::to_string(support.n()) +
                           " does not match vector length " + std::to_string(x.size()));
    Vector out(x.size(), 0.0);
    for (std::size_t i : support.indices()) out[i] = x[i];
    return out;
}

double complexity(std::size_t s, std::size_t n) {
    if (n == 0) throw InvalidInput("complexity: n must be >= 1");
    if (s > n) throw InvalidInput("complexity: s exceeds n");
    if (s == 0) return 0.0;
    const double sd = static_cast<double>(s);
    return sd * (1.0 + std::log(static_cast<double>(n) / sd));
}

double complexity(long long s, long long n) {
    if (s < 0 || n < 1) throw InvalidInput("complexity: require 0 <= s <= n, n >= 1");
    return complexity(static_cast<std::size_t>(s), static_cast<std::size_t>(n));
}

double penalty_of_size(std::size_t size, std::size_t n) {
    if (size == 0) return 0.0;
    const double sd = static_cast<double>(size);
    return sd * std::sqrt(1.0 + std::log(static_cast<double>(n) / sd));
}

double penalty(const SupportSet& support) {
    return penalty_of_size(support.size(), support.n());
}

ComplexitySum complexity_sum_bound(std::size_t n, double nu) {
    if (!(nu > 1.0)) throw InvalidInput("complexity_sum_bound: nu must exceed 1");
    if (n < 1 || n > 30) throw InvalidInput("complexity_sum_bound: n must lie in [1, 30]");

    long double sum = 0.0L;
    long double binom = 1.0L;  // C(n, 0)
    for (std::size_t s = 1; s <= n; ++s) {
        binom = binom * static_cast<long double>(n - s + 1) / static_cast<long double>(s);
        const long double sl = static_cast<long double>(s);
        const long double lambda = sl * (1.0L + std::log(static_cast<long double>(n) / sl));
        sum += binom * std::exp(-static_cast<long double>(nu) * lambda);
    }
    const double bound = 1.0 / std::expm1(nu - 1.0);
    return {static_cast<double>(sum), bound};
}

}  // namespace qsparse
