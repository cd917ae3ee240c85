#pragma once

#include "fermi/combinatorics.hpp"
#include "fermi/reservoir.hpp"
#include "fermi/system.hpp"

namespace fermi {

struct LimitCoefficients {
    CMat W, L, K, H_eff;
    CMat Lab[2][2];
    double gamma = 0.0;

    const CMat& L_ab(int a, int b) const { return Lab[a][b]; }
};

/// L_ab = -i E_ab - kappa E_a1 (1 + i kappa E11)^{-1} E_1b, K = -L00,
/// W = (1 - i conj(kappa) E11)(1 + i kappa E11)^{-1}, L = L10,
/// H_eff = -i(K - gamma/2 L^dagger L).
LimitCoefficients build_limit_coefficients(const SystemModel& sys);

/// L_ab(1) = -i E_ab, L_ab(r) = -kappa E_a1 (-i kappa E11)^{r-2} E_1b.
CMat build_L_r(const SystemModel& sys, int a, int b, int r);
/// Bound on ||sum_{r>R} L_ab(r)||.
double L_r_tail_bound(const SystemModel& sys, int a, int b, int R);

struct ResummationResult {
    double residual = 0.0;
    double tail_bound = 0.0;
    bool pass = false;
};

/// Compares L_{a_n b_n}...L_{a_1 b_1} with the sum over type-I partitions
/// (parts of size <= R_max) of L_{a_n b_n}(r_n)...L_{a_1 b_1}(r_1).
ResummationResult resummation_check(const SystemModel& sys, const Bits& alpha, const Bits& beta, int R_max);

/// Leg of the limit noise space: profile (x) 1_[S,T].
using NoiseLeg = SmearedVector;

/// One term of the noise matrix element: a constant times the indicator
/// that each s_i lies in windows[i] (index 0 is s_1, the earliest time).
struct NoiseTerm {
    cplx coefficient;
    std::vector<std::pair<double, double>> windows;
};

struct NoiseExpansion {
    int n = 0;
    std::vector<NoiseTerm> terms;

    /// Value at times s_1 < ... < s_n.
    cplx evaluate(const std::vector<double>& s) const;
    /// Integral over 0 < s_1 < ... < s_n < t.
    cplx integrate_simplex(double t) const;
};

/// <prod' A+(left) Psi | dA^{a_n b_n}_{s_n} ... dA^{a_1 b_1}_{s_1} prod A+(right) Psi>
/// as a signed sum over leg/vertex contractions.
NoiseExpansion noise_matrix_element(const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                                    const Bits& alpha, const Bits& beta,
                                    const std::vector<NoiseLeg>& right);

/// Gram value of the leg vectors in the limit space (no word).
cplx limit_leg_gram(const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                    const std::vector<NoiseLeg>& right);

struct QsdeOptions {
    int N_max = -1;       // -1: increase the order until the tail bound drops below tail_tol
    double tail_tol = 1e-13;
    int N_cap = 400;
};

struct QsdeResult {
    cplx value;
    std::vector<cplx> per_order;  // per_order[n] = order-n contribution
    double tail_bound = 0.0;
    // floating-point estimate; large when orders cancel (||L00|| t well above 10)
    double roundoff = 0.0;
};

/// Limit matrix element summed over orders n and words (alpha, beta).
QsdeResult qsde_matrix_element(const SystemModel& sys, const ReservoirModel& bath,
                               const std::vector<NoiseLeg>& left, const std::vector<NoiseLeg>& right,
                               const CVec& phi1, const CVec& phi2, double t, const QsdeOptions& opt = {});

/// Order-n contribution assembled over type-I partitions with hatted bit
/// vectors and raw E products (parts of size <= R_max).
cplx qsde_order_hat_form(const SystemModel& sys, const ReservoirModel& bath,
                         const std::vector<NoiseLeg>& left, const std::vector<NoiseLeg>& right,
                         const CVec& phi1, const CVec& phi2, double t, int n, int R_max);

/// Upper bound on |order-n contribution| of the limit series.
double qsde_order_bound(const SystemModel& sys, const ReservoirModel& bath,
                        const std::vector<NoiseLeg>& left, const std::vector<NoiseLeg>& right,
                        const CVec& phi1, const CVec& phi2, double t, int n);

/// Hatted bit vectors: alpha at part maxima, beta at part minima, 1 elsewhere.
std::pair<Bits, Bits> reindex_hat(const Bits& alpha, const Bits& beta, const Partition& g);

}  // namespace fermi
