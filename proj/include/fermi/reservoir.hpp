#pragma once

#include "fermi/types.hpp"

#include <optional>
#include <variant>

namespace fermi {

/// J(nu) = (gamma0 Gamma^2 / 2pi) / ((nu - omega - delta)^2 + Gamma^2).
struct Lorentzian {
    double gamma0 = 1.0, width = 1.0, detuning = 0.0;
};
/// J(nu) = height on |nu - omega - delta| <= half_width.
struct FlatBand {
    double height = 1.0, half_width = 1.0, detuning = 0.0;
};
/// Piecewise-linear J through (nu_i, J_i), zero outside the table.
struct Tabulated {
    std::vector<double> nu, J;
};
using SpectralFamily = std::variant<Lorentzian, FlatBand, Tabulated>;

/// Uniform midpoint grid used by the finite-mode bath. For the Lorentzian
/// the band is omega + delta +- half_span * width; flat bands and tables use
/// their own support.
struct GridSpec {
    int points = 400;
    double half_span = 8.0;
};

/// Which two-point function the finite-lambda evaluators use: the continuum
/// kernel, or the exact kernel of the discretized bath (sum over grid modes).
enum class KernelMode { Continuum, FiniteModes };

/// G_1(u) = A e^{-z u} for u >= 0 and conj(G_1(-u)) for u < 0.
struct ExponentialKernel {
    cplx A;
    cplx z;
};

class ReservoirModel {
public:
    ReservoirModel(SpectralFamily family, double omega, GridSpec grid = {},
                   KernelMode mode = KernelMode::Continuum);

    const SpectralFamily& family() const { return family_; }
    double omega() const { return omega_; }
    KernelMode mode() const { return mode_; }
    const GridSpec& grid() const { return grid_; }
    ReservoirModel with_mode(KernelMode m) const;

    double spectral_density(double nu) const;

    /// Continuum kernel G_1(u) = int J(nu) e^{-i(nu-omega)u} dnu.
    cplx g1_continuum(double u) const;
    /// Grid sum sum_k w_k J(nu_k) e^{-i(nu_k-omega)u}.
    cplx g1_discrete(double u) const;
    /// Continuum integral restricted to the grid band (what the grid sum approximates).
    cplx g1_band_limited(double u) const;
    /// G_1 in the model's kernel mode.
    cplx g1(double u) const;

    /// int_0^x G_1 and int_0^x int_0^y G_1 in the model's kernel mode.
    cplx H(double x) const;
    cplx H2(double x) const;

    std::optional<ExponentialKernel> exponential_kernel() const;

    /// kappa = int_0^inf G_1, Kbar = int_0^inf |G_1|. For FiniteModes the
    /// continuum values are returned (the grid kernel is not integrable).
    cplx kappa() const;
    double kbar() const;
    double gamma() const { return 2.0 * kappa().real(); }
    /// kappa = pi J(omega) - i PV int J(nu)/(nu-omega) dnu, by quadrature.
    cplx kappa_spectral() const;

    // finite-mode bath
    const std::vector<double>& grid_nu() const { return nu_; }
    double grid_spacing() const { return dnu_; }
    int num_modes() const { return int(nu_.size()); }
    /// x_k = nu_k - omega
    Eigen::VectorXd mode_detunings() const;
    /// g_k = sqrt(w_k J(nu_k))
    CVec couplings() const;
    double band_lo() const { return lo_; }
    double band_hi() const { return hi_; }
    double t_valid() const;

    /// Throws GuardError if |u| exceeds the grid's validity window.
    void check_window(double u, const char* what) const;

private:
    SpectralFamily family_;
    double omega_;
    GridSpec grid_;
    KernelMode mode_;
    double lo_ = 0, hi_ = 0, dnu_ = 0;
    std::vector<double> nu_, weights_;
    cplx kappa_cache_;
    double kbar_cache_;
};

/// G_lambda(t) = G_1(t/lambda^2)/lambda^2. The Discretized evaluator uses the
/// grid sum and enforces |t|/lambda^2 <= T_valid.
enum class Evaluator { Continuum, Discretized };
cplx correlation(const ReservoirModel& model, double t, double lambda,
                 Evaluator ev = Evaluator::Continuum);

/// Spectral profile of a test vector: "coupling" f = c g (amplitude c sqrt J)
/// or "box" (amplitude c on [lo, hi]).
struct LegProfile {
    enum class Kind { Coupling, Box };
    Kind kind = Kind::Coupling;
    cplx coefficient = 1.0;
    double lo = 0.0, hi = 0.0;

    static LegProfile coupling(cplx c = 1.0) { return {Kind::Coupling, c, 0, 0}; }
    static LegProfile box(cplx c, double lo, double hi) { return {Kind::Box, c, lo, hi}; }
    cplx amplitude(const ReservoirModel& m, double nu) const;
};

/// (f1|f2) = int_R <f1|S_u f2> du = 2 pi conj(f1^(omega)) f2^(omega).
cplx k_inner(const ReservoirModel& m, const LegProfile& a, const LegProfile& b);
/// Time-domain route for coupling profiles: int_R of the cross kernel.
cplx k_inner_quadrature(const ReservoirModel& m, const LegProfile& a, const LegProfile& b);

/// Collective vector of a profile smeared over [S, T].
struct SmearedVector {
    LegProfile profile;
    double S = 0.0, T = 1.0;
};

/// <a~(lambda)|b~(lambda)> = lambda^{-2} int_a int_b C_ab((u-v)/lambda^2).
cplx collective_inner(const ReservoirModel& m, const SmearedVector& a, const SmearedVector& b,
                      double lambda);
/// |[Sa,Ta] cap [Sb,Tb]| (fa|fb)
cplx limit_collective_inner(const ReservoirModel& m, const SmearedVector& a, const SmearedVector& b);

/// h(t, lambda) = (1/lambda) <f~(lambda)|S_{t/lambda^2} g>.
cplx h_function(const ReservoirModel& m, const SmearedVector& leg, double t, double lambda);
/// 1_[S,T](t) (f|g)
cplx limit_h(const ReservoirModel& m, const SmearedVector& leg, double t);
/// int_R |<S_u f|g>| du, the uniform bound on |h|.
double h_bound(const ReservoirModel& m, const LegProfile& p);

/// Mode amplitudes of the collective vector on the grid:
/// f~_k = lambda^{-1} f_k int_S^T e^{i x_k u/lambda^2} du.
CVec collective_modes(const ReservoirModel& m, const SmearedVector& leg, double lambda);

}  // namespace fermi
