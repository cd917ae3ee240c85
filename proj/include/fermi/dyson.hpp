#pragma once

#include "fermi/combinatorics.hpp"
#include "fermi/reservoir.hpp"
#include "fermi/system.hpp"

#include <cstdint>
#include <string>

namespace fermi {

/// Inputs of one Dyson matrix element <phi1 (x) left legs | D_n | phi2 (x) right legs>.
struct DysonTermSpec {
    int n = 0;
    double t = 1.0;
    double lambda = 0.5;
    SystemModel sys;
    ReservoirModel bath{Lorentzian{}, 0.0};
    std::vector<SmearedVector> left, right;
    CVec phi1, phi2;
    Evaluator evaluator = Evaluator::Continuum;

    /// Throws on size mismatches, n outside [0, 5], bad leg intervals, or a
    /// t/lambda^2 past the validity window of a discretized kernel.
    void validate() const;
};

enum class SimplexScheme { Auto, Nested, MonteCarlo };

struct IntegratorOptions {
    SimplexScheme scheme = SimplexScheme::Auto;
    double rel_tol = 1e-8;
    double abs_tol = 1e-11;
    long samples = 200000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: FERMI_LAB_THREADS or hardware concurrency
};

struct DysonTermResult {
    cplx value;
    double std_err = 0.0;  // Monte Carlo standard error, or the quadrature error estimate
    SimplexScheme scheme = SimplexScheme::Nested;
    int structures = 0;    // (alpha, beta, G, P1, P2) tuples with a nonzero prefactor
};

/// Time-ordered integrand at s_1 < ... < s_n (summed over all structures),
/// without the (-i)^n prefactor.
cplx dyson_integrand(const DysonTermSpec& spec, const std::vector<double>& s);

/// The order-n term without the (-i)^n prefactor.
DysonTermResult dyson_term(const DysonTermSpec& spec, const IntegratorOptions& opt = {});

/// I(n, G): simplex integral of the |G_lambda| chains of G. Closed form for
/// a continuum Lorentzian kernel, nested quadrature otherwise (n <= 3).
double chain_integral(const ReservoirModel& bath, const Partition& G, double t, double lambda,
                      Evaluator ev = Evaluator::Continuum);

/// Chain integrals of a type-II partition along a lambda sweep.
std::vector<double> type_two_decay(const ReservoirModel& bath, const Partition& G, double t,
                                   const std::vector<double>& lambdas, Evaluator ev = Evaluator::Continuum);

/// Constants of the order-n estimate.
struct BoundConstants {
    double Ch = 1.0, Cf = 1.0, C11 = 0.0, C = 0.0;
    int km = 0, kp = 0;
    double phi_norms = 1.0;
    double kbar = 0.0;
};

BoundConstants bound_constants(const DysonTermSpec& spec);

/// Upper bound on |order-n term|. Requires Kbar ||E11|| < 1.
double truncation_bound(const DysonTermSpec& spec, int n);

struct DysonSumResult {
    cplx value;
    std::vector<cplx> per_order;  // (-i)^n times the order-n term
    double std_err = 0.0;
    double tail_bound = 0.0;
};

DysonSumResult dyson_partial_sum(const DysonTermSpec& spec, int N_max, const IntegratorOptions& opt = {});

}  // namespace fermi
