#pragma once

#include <cstddef>
#include <vector>

namespace qsparse {

struct Interval {
    double lower;
    double upper;
};

/// One-sided Clopper-Pearson upper limit for a binomial proportion.
double binomial_upper_limit(std::size_t successes, std::size_t trials, double confidence = 0.95);

/// Two-sided Clopper-Pearson interval.
Interval binomial_interval(std::size_t successes, std::size_t trials, double confidence = 0.95);

/// Order statistic Z_(ceil(N tau)) of the sample (1-based rank, at least 1).
double empirical_quantile(std::vector<double> samples, double tau);

/// Median of the values (mean of the two middle ones for even counts).
double median(std::vector<double> values);

}  // namespace qsparse
