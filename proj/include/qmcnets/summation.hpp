#pragma once

#include <cmath>

namespace qmcnets {

/// Neumaier-compensated accumulator; keeps long positive sums accurate to a
/// few ulps regardless of length.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace qmcnets
