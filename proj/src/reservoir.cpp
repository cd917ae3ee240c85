#include "fermi/reservoir.hpp"

#include "fermi/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fermi {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Number of sub-intervals so that each holds at most ~2 oscillations of e^{i rate x}.
std::vector<double> oscillation_breaks(double a, double b, double rate) {
    std::vector<double> br;
    const int pieces = int(std::min(4000.0, std::ceil(std::abs(rate) * (b - a) / (4.0 * kPi))));
    for (int k = 1; k < pieces; ++k) br.push_back(a + (b - a) * k / pieces);
    return br;
}

double tab_eval(const Tabulated& t, double nu) {
    if (nu <= t.nu.front() || nu >= t.nu.back()) {
        if (nu == t.nu.front()) return t.J.front();
        if (nu == t.nu.back()) return t.J.back();
        return 0.0;
    }
    const auto it = std::upper_bound(t.nu.begin(), t.nu.end(), nu);
    const std::size_t k = std::size_t(it - t.nu.begin()) - 1;
    const double s = (nu - t.nu[k]) / (t.nu[k + 1] - t.nu[k]);
    return t.J[k] + s * (t.J[k + 1] - t.J[k]);
}

}  // namespace

ReservoirModel::ReservoirModel(SpectralFamily family, double omega, GridSpec grid, KernelMode mode)
    : family_(std::move(family)), omega_(omega), grid_(grid), mode_(mode) {
    if (grid_.points < 2) throw GuardError("reservoir grid needs at least 2 points");
    std::visit(overloaded{
                   [&](const Lorentzian& l) {
                       if (!(l.gamma0 > 0) || !(l.width > 0))
                           throw GuardError("Lorentzian needs gamma0 > 0 and width > 0");
                       if (!(grid_.half_span > 0)) throw GuardError("grid half_span must be positive");
                       lo_ = omega_ + l.detuning - grid_.half_span * l.width;
                       hi_ = omega_ + l.detuning + grid_.half_span * l.width;
                   },
                   [&](const FlatBand& f) {
                       if (!(f.height > 0) || !(f.half_width > 0))
                           throw GuardError("flat band needs height > 0 and half_width > 0");
                       lo_ = omega_ + f.detuning - f.half_width;
                       hi_ = omega_ + f.detuning + f.half_width;
                   },
                   [&](const Tabulated& t) {
                       if (t.nu.size() < 2 || t.nu.size() != t.J.size())
                           throw GuardError("tabulated density needs >= 2 (nu, J) pairs");
                       for (std::size_t k = 0; k < t.nu.size(); ++k) {
                           if (t.J[k] < 0) throw GuardError("tabulated density must be non-negative");
                           if (k && !(t.nu[k] > t.nu[k - 1]))
                               throw GuardError("tabulated frequencies must increase strictly");
                       }
                       lo_ = t.nu.front();
                       hi_ = t.nu.back();
                   },
               },
               family_);
    dnu_ = (hi_ - lo_) / grid_.points;
    for (int k = 0; k < grid_.points; ++k) {
        nu_.push_back(lo_ + (k + 0.5) * dnu_);
        weights_.push_back(dnu_);
    }
    // continuum constants
    std::visit(overloaded{
                   [&](const Lorentzian& l) {
                       const double A = l.gamma0 * l.width / 2.0;
                       kappa_cache_ = A / cplx(l.width, l.detuning);
                       kbar_cache_ = l.gamma0 / 2.0;
                   },
                   [&](const FlatBand& f) {
                       const double B = f.half_width, d = f.detuning;
                       if (std::abs(std::abs(d) - B) < 1e-12)
                           throw GuardError("flat band edge at the system frequency: kappa diverges");
                       const double re = std::abs(d) < B ? kPi * f.height : 0.0;
                       kappa_cache_ = cplx(re, -f.height * std::log(std::abs((B + d) / (B - d))));
                       kbar_cache_ = std::numeric_limits<double>::infinity();
                   },
                   [&](const Tabulated& t) {
                       kappa_cache_ = kappa_spectral();
                       if (t.J.front() != 0.0 || t.J.back() != 0.0) {
                           kbar_cache_ = std::numeric_limits<double>::infinity();
                           return;
                       }
                       double jumps = 0.0, min_seg = hi_ - lo_;
                       std::vector<double> slope(t.nu.size() + 1, 0.0);
                       for (std::size_t k = 0; k + 1 < t.nu.size(); ++k) {
                           slope[k + 1] = (t.J[k + 1] - t.J[k]) / (t.nu[k + 1] - t.nu[k]);
                           min_seg = std::min(min_seg, t.nu[k + 1] - t.nu[k]);
                       }
                       for (std::size_t k = 0; k < t.nu.size(); ++k) jumps += std::abs(slope[k + 1] - slope[k]);
                       // |G_1(u)| <= jumps / u^2 bounds the tail beyond U
                       const double U = 200.0 / min_seg;
                       QuadratureOptions opt;
                       opt.abs_tol = 1e-9;
                       opt.rel_tol = 1e-8;
                       kbar_cache_ = integrate_pieces([&](double u) { return std::abs(g1_continuum(u)); }, 0.0, U,
                                                      oscillation_breaks(0.0, U, hi_ - lo_), opt) +
                                     jumps / U;
                   },
               },
               family_);
}

ReservoirModel ReservoirModel::with_mode(KernelMode m) const {
    ReservoirModel copy = *this;
    copy.mode_ = m;
    return copy;
}

double ReservoirModel::spectral_density(double nu) const {
    return std::visit(overloaded{
                          [&](const Lorentzian& l) {
                              const double y = nu - omega_ - l.detuning;
                              return l.gamma0 * l.width * l.width / (2.0 * kPi) / (y * y + l.width * l.width);
                          },
                          [&](const FlatBand& f) {
                              return std::abs(nu - omega_ - f.detuning) <= f.half_width ? f.height : 0.0;
                          },
                          [&](const Tabulated& t) { return tab_eval(t, nu); },
                      },
                      family_);
}

cplx ReservoirModel::g1_continuum(double u) const {
    return std::visit(
        overloaded{
            [&](const Lorentzian& l) {
                const double A = l.gamma0 * l.width / 2.0;
                return A * std::exp(-l.width * std::abs(u)) * std::exp(cplx(0.0, -l.detuning * u));
            },
            [&](const FlatBand& f) {
                const double B = f.half_width;
                const double s = std::abs(B * u) < 1e-8 ? 2.0 * B : 2.0 * std::sin(B * u) / u;
                return f.height * s * std::exp(cplx(0.0, -f.detuning * u));
            },
            [&](const Tabulated& t) {
                cplx total = 0.0;
                for (std::size_t k = 0; k + 1 < t.nu.size(); ++k) {
                    const double a = t.nu[k], b = t.nu[k + 1];
                    const double s = (t.J[k + 1] - t.J[k]) / (b - a);
                    if (std::abs(u) * (b - a) < 1.0) {
                        total += integrate(
                            [&](double nu) {
                                return (t.J[k] + s * (nu - a)) * std::exp(cplx(0.0, -(nu - omega_) * u));
                            },
                            a, b);
                    } else {
                        // exact antiderivative of (J_a + s(nu-a)) e^{-i(nu-omega)u}
                        auto F = [&](double nu, double Jv) {
                            const cplx E = std::exp(cplx(0.0, -(nu - omega_) * u));
                            return Jv * E / cplx(0.0, -u) + s * E / (u * u);
                        };
                        total += F(b, t.J[k + 1]) - F(a, t.J[k]);
                    }
                }
                return total;
            },
        },
        family_);
}

cplx ReservoirModel::g1_discrete(double u) const {
    cplx total = 0.0;
    for (std::size_t k = 0; k < nu_.size(); ++k)
        total += weights_[k] * spectral_density(nu_[k]) * std::exp(cplx(0.0, -(nu_[k] - omega_) * u));
    return total;
}

cplx ReservoirModel::g1_band_limited(double u) const {
    if (!std::holds_alternative<Lorentzian>(family_)) return g1_continuum(u);
    auto f = [&](double nu) { return spectral_density(nu) * std::exp(cplx(0.0, -(nu - omega_) * u)); };
    return integrate_pieces(f, lo_, hi_, oscillation_breaks(lo_, hi_, u));
}

cplx ReservoirModel::g1(double u) const {
    return mode_ == KernelMode::FiniteModes ? g1_discrete(u) : g1_continuum(u);
}

std::optional<ExponentialKernel> ReservoirModel::exponential_kernel() const {
    if (mode_ != KernelMode::Continuum) return std::nullopt;
    if (const auto* l = std::get_if<Lorentzian>(&family_))
        return ExponentialKernel{l->gamma0 * l->width / 2.0, cplx(l->width, l->detuning)};
    return std::nullopt;
}

cplx ReservoirModel::H(double x) const {
    if (x == 0.0) return 0.0;
    if (mode_ == KernelMode::FiniteModes) {
        cplx total = 0.0;
        for (std::size_t k = 0; k < nu_.size(); ++k)
            total += weights_[k] * spectral_density(nu_[k]) * x * phi1(cplx(0.0, -(nu_[k] - omega_) * x));
        return total;
    }
    // H(-x) = -conj(H(x))
    if (x < 0) return -std::conj(H(-x));
    if (auto ek = exponential_kernel()) return ek->A * x * phi1(-ek->z * x);
    return integrate_pieces([&](double u) { return g1_continuum(u); }, 0.0, x,
                            oscillation_breaks(0.0, x, hi_ - lo_));
}

cplx ReservoirModel::H2(double x) const {
    if (x == 0.0) return 0.0;
    if (mode_ == KernelMode::FiniteModes) {
        cplx total = 0.0;
        for (std::size_t k = 0; k < nu_.size(); ++k)
            total += weights_[k] * spectral_density(nu_[k]) * x * x * phi2(cplx(0.0, -(nu_[k] - omega_) * x));
        return total;
    }
    // H2(-x) = conj(H2(x))
    if (x < 0) return std::conj(H2(-x));
    if (auto ek = exponential_kernel()) return ek->A * x * x * phi2(-ek->z * x);
    return integrate_pieces([&](double u) { return (x - u) * g1_continuum(u); }, 0.0, x,
                            oscillation_breaks(0.0, x, hi_ - lo_));
}

cplx ReservoirModel::kappa() const { return kappa_cache_; }

double ReservoirModel::kbar() const {
    if (!std::isfinite(kbar_cache_))
        throw GuardError("Kbar diverges: the kernel is not absolutely integrable for this spectral family");
    return kbar_cache_;
}

cplx ReservoirModel::kappa_spectral() const {
    // PV int J(nu)/(nu-omega) = int_0^R [J(omega+y) - J(omega-y)]/y dy
    std::vector<double> breaks;
    double R;
    if (const auto* l = std::get_if<Lorentzian>(&family_)) {
        R = std::numeric_limits<double>::infinity();
        breaks.push_back(std::abs(l->detuning));
    } else {
        R = std::max(hi_ - omega_, omega_ - lo_);
        breaks.push_back(std::abs(lo_ - omega_));
        breaks.push_back(std::abs(hi_ - omega_));
        if (const auto* t = std::get_if<Tabulated>(&family_))
            for (double nu : t->nu) breaks.push_back(std::abs(nu - omega_));
    }
    auto f = [&](double y) {
        if (y == 0.0) return 0.0;
        return (spectral_density(omega_ + y) - spectral_density(omega_ - y)) / y;
    };
    QuadratureOptions opt;
    opt.abs_tol = 1e-12;
    double pv = 0.0;
    if (std::isinf(R)) {
        const double b = breaks.front();
        pv = (b > 0 ? integrate(f, 0.0, b, opt) : 0.0) + integrate(f, b, R, opt);
    } else {
        pv = integrate_pieces(f, 0.0, R, breaks, opt);
    }
    return cplx(kPi * spectral_density(omega_), -pv);
}

Eigen::VectorXd ReservoirModel::mode_detunings() const {
    Eigen::VectorXd x(nu_.size());
    for (std::size_t k = 0; k < nu_.size(); ++k) x(Eigen::Index(k)) = nu_[k] - omega_;
    return x;
}

CVec ReservoirModel::couplings() const {
    CVec g(nu_.size());
    for (std::size_t k = 0; k < nu_.size(); ++k)
        g(Eigen::Index(k)) = std::sqrt(weights_[k] * spectral_density(nu_[k]));
    return g;
}

double ReservoirModel::t_valid() const { return kPi / dnu_; }

void ReservoirModel::check_window(double u, const char* what) const {
    if (std::abs(u) > t_valid())
        throw GuardError(std::string(what) + ": microscopic time " + std::to_string(u) +
                         " exceeds the grid validity window T_valid = " + std::to_string(t_valid()) +
                         " (refine the grid or increase lambda)");
}

cplx correlation(const ReservoirModel& model, double t, double lambda, Evaluator ev) {
    if (!(lambda > 0)) throw GuardError("correlation: lambda must be positive");
    const double u = t / (lambda * lambda);
    if (ev == Evaluator::Discretized) {
        model.check_window(u, "correlation");
        return model.g1_discrete(u) / (lambda * lambda);
    }
    return model.g1_continuum(u) / (lambda * lambda);
}

cplx LegProfile::amplitude(const ReservoirModel& m, double nu) const {
    if (kind == Kind::Coupling) return coefficient * std::sqrt(m.spectral_density(nu));
    return (nu >= lo && nu <= hi) ? coefficient : cplx(0.0);
}

cplx k_inner(const ReservoirModel& m, const LegProfile& a, const LegProfile& b) {
    return 2.0 * kPi * std::conj(a.amplitude(m, m.omega())) * b.amplitude(m, m.omega());
}

cplx k_inner_quadrature(const ReservoirModel& m, const LegProfile& a, const LegProfile& b) {
    if (a.kind != LegProfile::Kind::Coupling || b.kind != LegProfile::Kind::Coupling)
        throw GuardError("k_inner_quadrature: time-domain route needs coupling profiles");
    m.kbar();  // integrability
    QuadratureOptions opt;
    opt.abs_tol = 1e-12;
    const cplx half = integrate([&](double u) { return m.g1_continuum(u); }, 0.0,
                                std::numeric_limits<double>::infinity(), opt);
    return std::conj(a.coefficient) * b.coefficient * (half + std::conj(half));
}

namespace {

/// int_S^T e^{i a u} du
cplx window_ft(double a, double S, double T) {
    return std::exp(cplx(0.0, a * S)) * (T - S) * phi1(cplx(0.0, a * (T - S)));
}

void check_interval(const SmearedVector& v) {
    if (!(v.T > v.S)) throw GuardError("smeared vector needs T > S");
}

/// Frequency-domain evaluation of int dnu conj(a^) b^ * kernel(nu) over the
/// joint support, used when a box profile is involved.
template <class K>
cplx spectral_integral(const ReservoirModel& m, const LegProfile& a, const LegProfile& b, K&& kernel,
                       double rate) {
    double lo = m.band_lo(), hi = m.band_hi();
    if (!std::holds_alternative<Tabulated>(m.family()) && !std::holds_alternative<FlatBand>(m.family())) {
        lo = -std::numeric_limits<double>::infinity();
        hi = std::numeric_limits<double>::infinity();
    }
    for (const auto* p : {&a, &b})
        if (p->kind == LegProfile::Kind::Box) {
            lo = std::max(lo, p->lo);
            hi = std::min(hi, p->hi);
        }
    if (!(hi > lo)) return 0.0;
    if (std::isinf(lo) || std::isinf(hi)) throw GuardError("spectral integral over an unbounded support");
    auto f = [&](double nu) { return std::conj(a.amplitude(m, nu)) * b.amplitude(m, nu) * kernel(nu); };
    std::vector<double> br = oscillation_breaks(lo, hi, rate);
    if (m.omega() > lo && m.omega() < hi) br.push_back(m.omega());
    return integrate_pieces(f, lo, hi, br);
}

}  // namespace

CVec collective_modes(const ReservoirModel& m, const SmearedVector& leg, double lambda) {
    check_interval(leg);
    if (!(lambda > 0)) throw GuardError("collective vector: lambda must be positive");
    const auto& nu = m.grid_nu();
    CVec out(nu.size());
    const double l2 = lambda * lambda;
    for (std::size_t k = 0; k < nu.size(); ++k) {
        const cplx fk = leg.profile.amplitude(m, nu[k]) * std::sqrt(m.grid_spacing());
        out(Eigen::Index(k)) = fk / lambda * window_ft((nu[k] - m.omega()) / l2, leg.S, leg.T);
    }
    return out;
}

cplx collective_inner(const ReservoirModel& m, const SmearedVector& a, const SmearedVector& b,
                      double lambda) {
    check_interval(a);
    check_interval(b);
    if (!(lambda > 0)) throw GuardError("collective_inner: lambda must be positive");
    if (m.mode() == KernelMode::FiniteModes)
        return collective_modes(m, a, lambda).dot(collective_modes(m, b, lambda));
    const double l2 = lambda * lambda;
    if (a.profile.kind == LegProfile::Kind::Coupling && b.profile.kind == LegProfile::Kind::Coupling) {
        const cplx c = std::conj(a.profile.coefficient) * b.profile.coefficient;
        return c * l2 *
               (m.H2((a.T - b.S) / l2) - m.H2((a.S - b.S) / l2) - m.H2((a.T - b.T) / l2) +
                m.H2((a.S - b.T) / l2));
    }
    const double span = std::max({std::abs(a.S), std::abs(a.T), std::abs(b.S), std::abs(b.T)});
    return spectral_integral(
        m, a.profile, b.profile,
        [&](double nu) {
            const double x = (nu - m.omega()) / l2;
            return std::conj(window_ft(x, a.S, a.T)) * window_ft(x, b.S, b.T) / l2;
        },
        2.0 * span / l2);
}

cplx limit_collective_inner(const ReservoirModel& m, const SmearedVector& a, const SmearedVector& b) {
    check_interval(a);
    check_interval(b);
    const double overlap = std::max(0.0, std::min(a.T, b.T) - std::max(a.S, b.S));
    if (overlap == 0.0) return 0.0;
    return overlap * k_inner(m, a.profile, b.profile);
}

cplx h_function(const ReservoirModel& m, const SmearedVector& leg, double t, double lambda) {
    check_interval(leg);
    if (!(lambda > 0)) throw GuardError("h_function: lambda must be positive");
    const double l2 = lambda * lambda;
    if (m.mode() == KernelMode::FiniteModes) {
        const CVec ft = collective_modes(m, leg, lambda);
        const CVec g = m.couplings();
        const Eigen::VectorXd x = m.mode_detunings();
        cplx total = 0.0;
        for (Eigen::Index k = 0; k < ft.size(); ++k)
            total += std::conj(ft(k)) * std::exp(cplx(0.0, x(k) * t / l2)) * g(k);
        return total / lambda;
    }
    if (leg.profile.kind == LegProfile::Kind::Coupling)
        return std::conj(leg.profile.coefficient) * (m.H((leg.T - t) / l2) - m.H((leg.S - t) / l2));
    const double span = std::max(std::abs(leg.S - t), std::abs(leg.T - t));
    return spectral_integral(
        m, leg.profile, LegProfile::coupling(1.0),
        [&](double nu) {
            const double x = (nu - m.omega()) / l2;
            // lambda^{-2} int_S^T e^{-i x (u - t)} du
            return std::conj(window_ft(x, leg.S - t, leg.T - t)) / l2;
        },
        2.0 * span / l2);
}

cplx limit_h(const ReservoirModel& m, const SmearedVector& leg, double t) {
    check_interval(leg);
    if (t < leg.S || t > leg.T) return 0.0;
    return k_inner(m, leg.profile, LegProfile::coupling(1.0));
}

double h_bound(const ReservoirModel& m, const LegProfile& p) {
    if (p.kind != LegProfile::Kind::Coupling)
        throw GuardError("h_bound: box profiles are not absolutely integrable against g");
    return std::abs(p.coefficient) * 2.0 * m.kbar();
}

}  // namespace fermi
