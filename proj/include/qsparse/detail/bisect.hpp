#pragma once

#include <cmath>
#include <string>

#include "qsparse/error.hpp"

namespace qsparse {

template <class Frequency>
double bisect_constant(Frequency&& frequency, double lo, double hi, double target) {
    if (!(lo < hi)) throw CalibrationError("calibration bracket is empty");

    constexpr int kProbes = 16;
    const bool geometric = lo > 0.0;
    double previous = frequency(lo);
    if (previous <= target) return lo;
    for (int k = 1; k <= kProbes; ++k) {
        const double frac = static_cast<double>(k) / kProbes;
        const double c = geometric ? lo * std::pow(hi / lo, frac) : lo + (hi - lo) * frac;
        const double f = frequency(c);
        if (f > previous)
            throw CalibrationError("non-monotone response: frequency rises from " +
                                   std::to_string(previous) + " to " + std::to_string(f) +
                                   " at " + std::to_string(c));
        previous = f;
    }
    if (previous > target)
        throw CalibrationError("frequency " + std::to_string(previous) +
                               " at the bracket maximum " + std::to_string(hi) +
                               " exceeds the target " + std::to_string(target));

    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (frequency(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace qsparse
