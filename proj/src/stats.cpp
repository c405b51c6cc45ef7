#include "qsparse/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "qsparse/error.hpp"

namespace qsparse {

using boost::math::binomial_distribution;

double binomial_upper_limit(std::size_t successes, std::size_t trials, double confidence) {
    if (trials == 0) throw InvalidInput("binomial_upper_limit: zero trials");
    if (successes >= trials) return 1.0;
    return binomial_distribution<>::find_upper_bound_on_p(
        static_cast<double>(trials), static_cast<double>(successes), 1.0 - confidence);
}

Interval binomial_interval(std::size_t successes, std::size_t trials, double confidence) {
    if (trials == 0) throw InvalidInput("binomial_interval: zero trials");
    const double alpha = (1.0 - confidence) / 2.0;
    const double n = static_cast<double>(trials);
    const double k = static_cast<double>(successes);
    const double lo = successes == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(n, k, alpha);
    const double hi =
        successes >= trials ? 1.0 : binomial_distribution<>::find_upper_bound_on_p(n, k, alpha);
    return {lo, hi};
}

double empirical_quantile(std::vector<double> samples, double tau) {
    if (samples.empty()) throw InvalidInput("empirical_quantile: empty sample");
    const auto n = static_cast<double>(samples.size());
    auto rank = static_cast<std::size_t>(std::ceil(n * tau));
    rank = std::clamp<std::size_t>(rank, 1, samples.size());
    auto nth = samples.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(samples.begin(), nth, samples.end());
    return *nth;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInput("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    if (values.size() % 2 == 1) return values[m];
    return 0.5 * (values[m - 1] + values[m]);
}

}  // namespace qsparse
