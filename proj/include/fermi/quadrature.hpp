#pragma once

#include "fermi/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fermi {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    unsigned max_depth = 18;
};

/// Adaptive Gauss-Kronrod (61 point) over [a, b], a or b may be infinite.
/// Throws ConvergenceError when the error estimate misses the target.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}, double* err_out = nullptr) {
    using R = decltype(f(a));
    if (a == b) return R(0.0);
    double err = 0.0, l1 = 0.0;
    const R v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, opt.max_depth, opt.rel_tol, &err, &l1);
    const double target = std::max(opt.abs_tol, opt.rel_tol * l1);
    if (!(err <= 10.0 * target))
        throw ConvergenceError("quadrature did not converge on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]: error estimate " + std::to_string(err));
    if (err_out) *err_out = err;
    return v;
}

/// Splits [a, b] at the given interior points before integrating.
template <class F>
auto integrate_pieces(F&& f, double a, double b, std::vector<double> breaks,
                      const QuadratureOptions& opt = {}) {
    using R = decltype(f(a));
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    R total(0.0);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = std::max(a, breaks[k]), hi = std::min(b, breaks[k + 1]);
        if (hi > lo) total += integrate(f, lo, hi, opt);
    }
    return total;
}

/// Adaptive GK31 by bisection; a panel is accepted once its error estimate is
/// below max(abs_tol, rel_tol * l1). The absolute budget halves with each split.
template <class R, class F>
R adaptive_gk31(const F& f, double a, double b, double rel_tol, double abs_tol, unsigned depth, double* err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double e = 0.0, l1 = 0.0;
    const R v = GK::integrate(f, a, b, 0, 0.0, &e, &l1);
    if (depth == 0 || e <= std::max(abs_tol, rel_tol * l1)) {
        *err += e;
        return v;
    }
    const double m = 0.5 * (a + b);
    return adaptive_gk31<R>(f, a, m, rel_tol, 0.5 * abs_tol, depth - 1, err) +
           adaptive_gk31<R>(f, m, b, rel_tol, 0.5 * abs_tol, depth - 1, err);
}

/// (e^w - 1)/w and (e^w - 1 - w)/w^2 without cancellation near w = 0.
cplx phi1(cplx w);
cplx phi2(cplx w);

}  // namespace fermi
