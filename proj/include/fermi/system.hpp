#pragma once

#include "fermi/types.hpp"

namespace fermi {

/// Coupling operators E_ab of the system (d x d) and the reservoir constant kappa.
struct SystemModel {
    CMat E00, E01, E10, E11;
    cplx kappa = 0.0;

    /// E01 is taken as E10^dagger.
    static SystemModel make(const CMat& E00, const CMat& E10, const CMat& E11, cplx kappa);

    int d() const { return int(E00.rows()); }
    const CMat& E(int a, int b) const;
    double gamma() const { return 2.0 * kappa.real(); }
    /// ||kappa E11||, must stay below 1.
    double resolvent_norm() const { return std::abs(kappa) * op_norm(E11); }

    /// Checks shapes, E_ab^dagger = E_ba and ||kappa E11|| < 1.
    void validate(double tol = 1e-12) const;
};

}  // namespace fermi
