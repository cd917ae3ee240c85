#pragma once

#include "fermi/types.hpp"

#include <random>

namespace fermi::testing {

inline CVec random_vec(std::mt19937_64& rng, int m, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(m);
    for (int k = 0; k < m; ++k) v(k) = cplx(nd(rng), nd(rng));
    return v;
}

inline CMat random_mat(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

inline CMat random_hermitian(std::mt19937_64& rng, int d) {
    CMat a = random_mat(rng, d, d);
    return 0.5 * (a + a.adjoint());
}

inline CMat random_unitary(std::mt19937_64& rng, int d) {
    Eigen::HouseholderQR<CMat> qr(random_mat(rng, d, d));
    return qr.householderQ();
}

inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace fermi::testing
