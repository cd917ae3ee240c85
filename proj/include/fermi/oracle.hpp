#pragma once

#include "fermi/reservoir.hpp"
#include "fermi/system.hpp"

namespace fermi {

/// Fock basis restricted to at most `cap` occupied modes out of M, ordered by
/// particle number and then by combinadic rank.
class SectorBasis {
public:
    SectorBasis(int modes, int cap);
    int modes() const { return M_; }
    int cap() const { return cap_; }
    long dim() const { return long(size_.size()); }
    /// First index of the top (n = cap) sector.
    long top_begin() const { return offset_[cap_]; }
    long index(const std::vector<int>& sorted_modes) const;
    std::vector<int> modes_of(long i) const;

    /// out += A+(f) in on one column (components leaving the basis are dropped).
    void add_creation(const CVec& f, const cplx* in, cplx* out) const;
    /// out += A-(f) in on one column.
    void add_annihilation(const CVec& f, const cplx* in, cplx* out) const;

private:
    int M_, cap_;
    std::vector<long> offset_;
    std::vector<signed char> size_;
    std::vector<int> occ_;        // cap entries per state
    std::vector<long> child_;     // state with occ[p] removed, cap entries per state
};

struct OracleOptions {
    int cap = -1;           // bath particle cap; -1 keeps the full Fock space
    double rel_tol = 1e-9;
    double abs_tol = 1e-9;
    long max_dim = 1L << 22;  // d times the basis size
};

/// One finite-lambda propagation on the discretized bath.
struct PropagatorRun {
    SystemModel sys;
    ReservoirModel bath{Lorentzian{}, 0.0};
    double lambda = 0.5;
    double t = 0.5;
    OracleOptions opt;
    /// Multiplies every E_ab; complex values are used for order extraction.
    cplx scale = 1.0;
};

struct OracleResult {
    cplx value;
    double norm_drift = 0.0;  // |<psi(t)|psi(t)> - <psi(0)|psi(0)>| / <psi(0)|psi(0)>
    double leakage = 0.0;     // bound on the state error caused by the particle cap
    long steps = 0;
    long dim = 0;
};

/// <phi1 (x) A+(u_1)...A+(u_k) Phi | U(t/lambda^2, lambda) phi2 (x) A+(v_k)...A+(v_1) Phi>
/// with u, v the collective vectors of the legs on the mode grid.
OracleResult oracle_matrix_element(const PropagatorRun& run, const std::vector<SmearedVector>& left,
                                   const std::vector<SmearedVector>& right, const CVec& phi1, const CVec& phi2);

struct PropagatorResult {
    CMat U;                  // on system (x) Fock, system index slowest
    double unitarity_drift;  // max |U^dag U - I|
};

/// Full propagator by propagating every basis column (d 2^M <= 2^14).
PropagatorResult oracle_propagator(const PropagatorRun& run);

/// Coefficients c_0..c_nmax of the matrix element as a power series in the
/// coupling scale, from N samples on the circle |scale| = radius. Order n
/// equals (-i)^n times the Dyson term.
std::vector<cplx> oracle_order_coefficients(const PropagatorRun& run, const std::vector<SmearedVector>& left,
                                            const std::vector<SmearedVector>& right, const CVec& phi1,
                                            const CVec& phi2, int nmax, int samples = 16, double radius = 0.5);

}  // namespace fermi
