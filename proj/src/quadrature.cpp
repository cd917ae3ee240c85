#include "fermi/quadrature.hpp"

namespace fermi {

cplx phi1(cplx w) {
    if (std::abs(w) < 1e-3) return 1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0;
    if (std::abs(w) < 0.5) {
        cplx term = 1.0, sum = 0.0;
        for (int k = 0; k < 20; ++k) {
            sum += term;
            term *= w / double(k + 2);
        }
        return sum;
    }
    if (w.imag() == 0.0) return std::expm1(w.real()) / w.real();
    return (std::exp(w) - 1.0) / w;
}

cplx phi2(cplx w) {
    if (std::abs(w) < 1.0) {
        // sum_k w^k/(k+2)!
        cplx term = 0.5, sum = 0.0;
        for (int k = 0; k < 24; ++k) {
            sum += term;
            term *= w / double(k + 3);
        }
        return sum;
    }
    return (std::exp(w) - 1.0 - w) / (w * w);
}

}  // namespace fermi
