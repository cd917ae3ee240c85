#pragma once

#include "fermi/types.hpp"

#include <utility>
#include <vector>

namespace fermi {

/// Volume of {0 < s_1 < ... < s_n < t, s_i in [lo_i, hi_i]} computed exactly
/// by sweeping the sorted window endpoints.
double constrained_simplex_volume(double t, const std::vector<std::pair<double, double>>& windows);

inline double simplex_volume(int n, double t) {
    double v = 1.0;
    for (int k = 1; k <= n; ++k) v *= t / k;
    return v;
}

/// Divided difference e^{x}[x_0, ..., x_m] of the exponential, via the
/// exponential of the bidiagonal matrix with the nodes on the diagonal.
cplx exp_divided_difference(const std::vector<cplx>& nodes);

}  // namespace fermi
