#include "fermi/oracle.hpp"

#include "fermi/combinatorics.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>

namespace fermi {

namespace {

long choose(int n, int k) {
    if (k < 0 || k > n) return 0;
    return long(binomial(n, k));
}

}  // namespace

SectorBasis::SectorBasis(int modes, int cap) : M_(modes), cap_(cap < 0 ? modes : std::min(cap, modes)) {
    require_dim(modes > 0, "sector basis: need at least one mode");
    offset_.assign(cap_ + 2, 0);
    for (int n = 0; n <= cap_; ++n) offset_[n + 1] = offset_[n] + choose(M_, n);
    const long D = offset_[cap_ + 1];
    size_.resize(D);
    occ_.assign(std::size_t(D) * std::max(cap_, 1), -1);
    child_.assign(std::size_t(D) * std::max(cap_, 1), -1);
    std::vector<int> c;
    for (int n = 0; n <= cap_; ++n) {
        // colex enumeration matches the combinadic rank sum_i C(c_i, i + 1)
        c.resize(n);
        for (int i = 0; i < n; ++i) c[i] = i;
        for (long r = 0; r < choose(M_, n); ++r) {
            const long idx = offset_[n] + r;
            size_[idx] = static_cast<signed char>(n);
            for (int i = 0; i < n; ++i) occ_[idx * cap_ + i] = c[i];
            if (n > 0) {
                int j = 0;
                while (j + 1 < n && c[j] + 1 == c[j + 1]) ++j;
                ++c[j];
                for (int k = 0; k < j; ++k) c[k] = k;
            }
        }
    }
    std::vector<int> rest;
    for (long idx = 0; idx < D; ++idx) {
        const int n = size_[idx];
        for (int p = 0; p < n; ++p) {
            rest.clear();
            for (int q = 0; q < n; ++q)
                if (q != p) rest.push_back(occ_[idx * cap_ + q]);
            child_[idx * cap_ + p] = index(rest);
        }
    }
}

long SectorBasis::index(const std::vector<int>& m) const {
    const int n = int(m.size());
    if (n > cap_) return -1;
    long r = offset_[n];
    for (int i = 0; i < n; ++i) r += choose(m[i], i + 1);
    return r;
}

std::vector<int> SectorBasis::modes_of(long i) const {
    return {occ_.begin() + i * cap_, occ_.begin() + i * cap_ + size_[i]};
}

void SectorBasis::add_creation(const CVec& f, const cplx* in, cplx* out) const {
    const long D = dim();
    for (long idx = 1; idx < D; ++idx) {
        const int n = size_[idx];
        cplx acc = 0.0;
        for (int p = 0; p < n; ++p) {
            const cplx v = f[occ_[idx * cap_ + p]] * in[child_[idx * cap_ + p]];
            acc += (p & 1) ? -v : v;
        }
        out[idx] += acc;
    }
}

void SectorBasis::add_annihilation(const CVec& f, const cplx* in, cplx* out) const {
    const long D = dim();
    for (long idx = 1; idx < D; ++idx) {
        const cplx x = in[idx];
        if (x == 0.0) continue;
        const int n = size_[idx];
        for (int p = 0; p < n; ++p) {
            const cplx v = std::conj(f[occ_[idx * cap_ + p]]) * x;
            out[child_[idx * cap_ + p]] += (p & 1) ? -v : v;
        }
    }
}

namespace {

using State = std::vector<cplx>;

struct Dynamics {
    const PropagatorRun& run;
    const SectorBasis& basis;
    int d;
    Eigen::VectorXd x;  // mode detunings
    CVec g;             // couplings
    CMat E00, E01, E10, E11;
    mutable CVec gt;
    mutable CMat tmp;

    Dynamics(const PropagatorRun& r, const SectorBasis& b)
        : run(r), basis(b), d(r.sys.d()), x(r.bath.mode_detunings()), g(r.bath.couplings()) {
        E00 = r.scale * r.sys.E00;
        E01 = r.scale * r.sys.E01;
        E10 = r.scale * r.sys.E10;
        E11 = r.scale * r.sys.E11;
    }

    // a_t^{+-}(lambda) = lambda^{-1} A^{+-}(S_{t/lambda^2} g), (S_tau g)_k = g_k e^{i x_k tau}
    void field(double t) const {
        const double l2 = run.lambda * run.lambda;
        gt.resize(g.size());
        for (int k = 0; k < g.size(); ++k) gt[k] = g[k] * std::exp(I * (x[k] * t / l2)) / run.lambda;
    }

    void operator()(const State& psi, State& dpsi, double t) const {
        const long D = basis.dim();
        field(t);
        Eigen::Map<const CMat> P(psi.data(), D, d);
        Eigen::Map<CMat> dP(dpsi.data(), D, d);
        dP.noalias() = P * E00.transpose();
        tmp.noalias() = P * E10.transpose();
        for (int s = 0; s < d; ++s) basis.add_creation(gt, tmp.data() + s * D, dP.data() + s * D);
        tmp.noalias() = P * E01.transpose();
        for (int s = 0; s < d; ++s) basis.add_annihilation(gt, tmp.data() + s * D, dP.data() + s * D);
        if (E11.cwiseAbs().maxCoeff() > 0.0) {
            tmp.noalias() = P * E11.transpose();
            CMat low = CMat::Zero(D, d);
            for (int s = 0; s < d; ++s) basis.add_annihilation(gt, tmp.data() + s * D, low.data() + s * D);
            for (int s = 0; s < d; ++s) basis.add_creation(gt, low.data() + s * D, dP.data() + s * D);
        }
        dP *= -I;
    }

    // Norm of the component E10 a+ psi that leaves the basis:
    // ||A+(f) X||^2 = ||f||^2 ||X||^2 - ||A-(f) X||^2 on the top sector.
    double leak_rate(const State& psi, double t) const {
        const long D = basis.dim(), top = basis.top_begin();
        if (basis.cap() >= basis.modes()) return 0.0;
        field(t);
        Eigen::Map<const CMat> P(psi.data(), D, d);
        CMat X = CMat::Zero(D, d);
        X.bottomRows(D - top) = P.bottomRows(D - top) * E10.transpose();
        CMat low = CMat::Zero(D, d);
        for (int s = 0; s < d; ++s) basis.add_annihilation(gt, X.data() + s * D, low.data() + s * D);
        const double v = gt.squaredNorm() * X.squaredNorm() - low.squaredNorm();
        return std::sqrt(std::max(v, 0.0));
    }
};

CVec bath_state(const SectorBasis& basis, const std::vector<CVec>& vs, bool reversed) {
    CVec psi = CVec::Zero(basis.dim());
    psi[0] = 1.0;
    const int k = int(vs.size());
    for (int i = 0; i < k; ++i) {
        const CVec& v = reversed ? vs[k - 1 - i] : vs[i];
        CVec next = CVec::Zero(basis.dim());
        basis.add_creation(v, psi.data(), next.data());
        psi.swap(next);
    }
    return psi;
}

void check_run(const PropagatorRun& run, int d) {
    if (!(run.lambda > 0.0) || run.t < 0.0) throw GuardError("oracle: need lambda > 0 and t >= 0");
    for (const CMat* m : {&run.sys.E00, &run.sys.E01, &run.sys.E10, &run.sys.E11})
        require_dim(m->rows() == d && m->cols() == d && d > 0, "oracle: E_ab must be d x d");
    run.bath.check_window(run.t / (run.lambda * run.lambda), "oracle propagation");
}

struct Propagated {
    State psi;
    double leakage = 0.0;
    long steps = 0;
};

Propagated propagate(const Dynamics& dyn, State psi, double t, const OracleOptions& opt) {
    namespace ode = boost::numeric::odeint;
    Propagated out;
    if (t == 0.0) {
        out.psi = std::move(psi);
        return out;
    }
    double last_t = 0.0, last_rate = dyn.leak_rate(psi, 0.0);
    auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(opt.abs_tol, opt.rel_tol);
    const double l2 = dyn.run.lambda * dyn.run.lambda;
    out.steps = long(ode::integrate_adaptive(stepper, dyn, psi, 0.0, t, 0.05 * l2, [&](const State& s, double tt) {
        if (tt <= last_t) return;
        const double r = dyn.leak_rate(s, tt);
        out.leakage += 0.5 * (r + last_rate) * (tt - last_t);
        last_rate = r;
        last_t = tt;
    }));
    out.psi = std::move(psi);
    return out;
}

}  // namespace

OracleResult oracle_matrix_element(const PropagatorRun& run, const std::vector<SmearedVector>& left,
                                   const std::vector<SmearedVector>& right, const CVec& phi1, const CVec& phi2) {
    const int d = run.sys.d();
    check_run(run, d);
    require_dim(phi1.size() == d && phi2.size() == d, "oracle: state dimension mismatch");
    const int M = run.bath.num_modes();
    const int cap = run.opt.cap < 0 ? M : run.opt.cap;
    if (int(right.size()) > cap || int(left.size()) > cap)
        throw GuardError("oracle: particle cap is below the number of legs");
    const SectorBasis basis(M, cap);
    if (basis.dim() * d > run.opt.max_dim)
        throw GuardError("oracle: truncated space of dimension " + std::to_string(basis.dim() * d) + " exceeds the cap");

    std::vector<CVec> lv, rv;
    for (const auto& l : left) lv.push_back(collective_modes(run.bath, l, run.lambda));
    for (const auto& r : right) rv.push_back(collective_modes(run.bath, r, run.lambda));
    const CVec ket_bath = bath_state(basis, rv, false);
    const CVec bra_bath = bath_state(basis, lv, true);

    const long D = basis.dim();
    State psi(std::size_t(D) * d);
    for (int s = 0; s < d; ++s)
        for (long b = 0; b < D; ++b) psi[s * D + b] = phi2[s] * ket_bath[b];
    double n0 = 0.0;
    for (const auto& v : psi) n0 += std::norm(v);

    const Dynamics dyn(run, basis);
    const auto res = propagate(dyn, std::move(psi), run.t, run.opt);
    double n1 = 0.0;
    for (const auto& v : res.psi) n1 += std::norm(v);

    OracleResult out;
    Eigen::Map<const CMat> P(res.psi.data(), D, d);
    out.value = (bra_bath.adjoint() * P * phi1.conjugate())(0, 0);
    out.norm_drift = n0 > 0.0 ? std::abs(n1 - n0) / n0 : 0.0;
    out.leakage = res.leakage;
    out.steps = res.steps;
    out.dim = D * d;
    return out;
}

PropagatorResult oracle_propagator(const PropagatorRun& run) {
    const int d = run.sys.d();
    check_run(run, d);
    const int M = run.bath.num_modes();
    if ((long(d) << M) > (1L << 14)) throw GuardError("oracle propagator: d 2^M exceeds 2^14");
    const SectorBasis basis(M, M);
    const long D = basis.dim(), N = D * d;
    const Dynamics dyn(run, basis);
    PropagatorResult out;
    out.U.resize(N, N);
    for (long c = 0; c < N; ++c) {
        State psi(N, 0.0);
        psi[c] = 1.0;
        const auto r = propagate(dyn, std::move(psi), run.t, run.opt);
        for (long i = 0; i < N; ++i) out.U(i, c) = r.psi[i];
    }
    out.unitarity_drift = (out.U.adjoint() * out.U - CMat::Identity(N, N)).cwiseAbs().maxCoeff();
    return out;
}

std::vector<cplx> oracle_order_coefficients(const PropagatorRun& run, const std::vector<SmearedVector>& left,
                                            const std::vector<SmearedVector>& right, const CVec& phi1,
                                            const CVec& phi2, int nmax, int samples, double radius) {
    if (nmax < 0 || samples <= nmax) throw std::invalid_argument("oracle orders: need samples > nmax >= 0");
    std::vector<cplx> c(nmax + 1, 0.0);
    for (int j = 0; j < samples; ++j) {
        const double th = 2.0 * M_PI * j / samples;
        PropagatorRun r = run;
        r.scale = radius * std::exp(I * th);
        const cplx me = oracle_matrix_element(r, left, right, phi1, phi2).value;
        for (int n = 0; n <= nmax; ++n) c[n] += me * std::exp(-I * (n * th)) / (samples * std::pow(radius, n));
    }
    return c;
}

}  // namespace fermi
