#include "fermi/limit.hpp"

#include "fermi/fock.hpp"
#include "fermi/legs.hpp"
#include "fermi/simplex.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace fermi {

SystemModel SystemModel::make(const CMat& E00, const CMat& E10, const CMat& E11, cplx kappa) {
    return SystemModel{E00, E10.adjoint(), E10, E11, kappa};
}

const CMat& SystemModel::E(int a, int b) const {
    if (a == 0) return b == 0 ? E00 : E01;
    return b == 0 ? E10 : E11;
}

void SystemModel::validate(double tol) const {
    const auto d = E00.rows();
    for (const CMat* m : {&E00, &E01, &E10, &E11})
        require_dim(m->rows() == d && m->cols() == d && d > 0, "system model: E_ab must be d x d");
    auto dev = [](const CMat& a, const CMat& b) { return (a - b).cwiseAbs().maxCoeff(); };
    const double scale = std::max({1.0, E00.cwiseAbs().maxCoeff(), E10.cwiseAbs().maxCoeff(),
                                   E11.cwiseAbs().maxCoeff()});
    if (dev(E00, E00.adjoint()) > tol * scale) throw GuardError("system model: E00 is not self-adjoint");
    if (dev(E11, E11.adjoint()) > tol * scale) throw GuardError("system model: E11 is not self-adjoint");
    if (dev(E01, E10.adjoint()) > tol * scale) throw GuardError("system model: E01 != E10^dagger");
    const double q = resolvent_norm();
    if (!(q < 1.0))
        throw GuardError("system model: ||kappa E11|| = " + std::to_string(q) + " violates ||kappa E11|| < 1");
}

LimitCoefficients build_limit_coefficients(const SystemModel& sys) {
    sys.validate();
    const int d = sys.d();
    const CMat Id = CMat::Identity(d, d);
    const cplx k = sys.kappa;
    const CMat R = Id + I * k * sys.E11;
    Eigen::FullPivLU<CMat> lu(R);
    if (!lu.isInvertible()) throw GuardError("1 + i kappa E11 is singular");
    const CMat Rinv = lu.inverse();

    LimitCoefficients c;
    c.gamma = sys.gamma();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) c.Lab[a][b] = -I * sys.E(a, b) - k * sys.E(a, 1) * Rinv * sys.E(1, b);
    c.W = (Id - I * std::conj(k) * sys.E11) * Rinv;
    c.L = c.Lab[1][0];
    c.K = -c.Lab[0][0];
    c.H_eff = -I * (c.K - 0.5 * c.gamma * c.L.adjoint() * c.L);
    return c;
}

CMat build_L_r(const SystemModel& sys, int a, int b, int r) {
    if (r < 1) throw std::invalid_argument("build_L_r: r must be >= 1");
    if (r == 1) return -I * sys.E(a, b);
    CMat mid = CMat::Identity(sys.d(), sys.d());
    const CMat step = -I * sys.kappa * sys.E11;
    for (int k = 0; k < r - 2; ++k) mid = mid * step;
    return -sys.kappa * sys.E(a, 1) * mid * sys.E(1, b);
}

double L_r_tail_bound(const SystemModel& sys, int a, int b, int R) {
    const double q = sys.resolvent_norm();
    if (!(q < 1.0)) throw GuardError("L_r tail: ||kappa E11|| must be < 1");
    if (R < 1) return std::abs(sys.kappa) * op_norm(sys.E(a, 1)) * op_norm(sys.E(1, b)) / (1.0 - q) +
                      op_norm(sys.E(a, b));
    return std::abs(sys.kappa) * op_norm(sys.E(a, 1)) * op_norm(sys.E(1, b)) * std::pow(q, R - 1) / (1.0 - q);
}

ResummationResult resummation_check(const SystemModel& sys, const Bits& alpha, const Bits& beta, int R_max) {
    const int n = int(alpha.size());
    require_dim(int(beta.size()) == n, "resummation_check: bit lengths differ");
    if (R_max < 1) throw std::invalid_argument("resummation_check: R_max must be >= 1");
    const auto lc = build_limit_coefficients(sys);
    const int d = sys.d();

    CMat lhs = CMat::Identity(d, d);
    for (int i = 0; i < n; ++i) lhs = lc.L_ab(alpha[i], beta[i]) * lhs;

    std::vector<std::vector<CMat>> Lr(n);
    for (int i = 0; i < n; ++i)
        for (int r = 1; r <= R_max; ++r) Lr[i].push_back(build_L_r(sys, alpha[i], beta[i], r));

    CMat rhs = CMat::Zero(d, d);
    std::vector<int> sizes(n, 1);
    while (true) {
        // the composition (r_1..r_n) is the type-I partition with these block sizes
        const Partition g = type_one_from_sizes(sizes);
        CMat term = CMat::Identity(d, d);
        for (int j = 0; j < n; ++j) term = Lr[j][g.parts()[j].size() - 1] * term;
        rhs += term;
        int pos = 0;
        while (pos < n && sizes[pos] == R_max) sizes[pos++] = 1;
        if (pos == n) break;
        ++sizes[pos];
    }

    ResummationResult res;
    res.residual = (lhs - rhs).cwiseAbs().maxCoeff();
    const double q = sys.resolvent_norm();
    std::vector<double> B(n), tau(n);
    for (int i = 0; i < n; ++i) {
        const int a = alpha[i], b = beta[i];
        B[i] = op_norm(sys.E(a, b)) + std::abs(sys.kappa) * op_norm(sys.E(a, 1)) * op_norm(sys.E(1, b)) / (1.0 - q);
        tau[i] = L_r_tail_bound(sys, a, b, R_max);
    }
    double prodB = 1.0;
    for (double b : B) prodB *= b;
    for (int j = 0; j < n; ++j) {
        double t = tau[j];
        for (int i = 0; i < n; ++i)
            if (i != j) t *= B[i];
        res.tail_bound += t;
    }
    // recursive summation of R_max^n products, each term at most prodB in sum
    const double terms = std::pow(double(R_max), n);
    const double slack = std::numeric_limits<double>::epsilon() * (64.0 * std::max(1, n) + terms) * prodB;
    res.pass = res.residual <= res.tail_bound + slack;
    return res;
}

cplx NoiseExpansion::evaluate(const std::vector<double>& s) const {
    require_dim(int(s.size()) == n, "noise expansion: wrong number of times");
    cplx total = 0.0;
    for (const auto& term : terms) {
        bool inside = true;
        for (int i = 0; i < n && inside; ++i)
            inside = s[i] >= term.windows[i].first && s[i] <= term.windows[i].second;
        if (inside) total += term.coefficient;
    }
    return total;
}

cplx NoiseExpansion::integrate_simplex(double t) const {
    cplx total = 0.0;
    for (const auto& term : terms) total += term.coefficient * constrained_simplex_volume(t, term.windows);
    return total;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_legs(const std::vector<NoiseLeg>& legs) {
    for (const auto& l : legs)
        if (!(l.T > l.S) || l.S < 0.0) throw GuardError("noise leg needs 0 <= S < T");
}

/// Contraction expansion with the word sign supplied by the caller.
NoiseExpansion noise_expansion(const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                               const Bits& alpha, const Bits& beta, const std::vector<NoiseLeg>& right,
                               int word_sign) {
    const int n = int(alpha.size());
    require_dim(int(beta.size()) == n, "noise matrix element: bit lengths differ");
    const int km = int(left.size()), kp = int(right.size());
    NoiseExpansion out;
    out.n = n;
    const auto g = LegProfile::coupling(1.0);
    std::vector<cplx> hl(km), hr(kp);
    for (int j = 0; j < km; ++j) hl[j] = k_inner(bath, left[j].profile, g);
    for (int j = 0; j < kp; ++j) hr[j] = std::conj(k_inner(bath, right[j].profile, g));

    for_each_leg_contraction(alpha, beta, km, kp, [&](const LegContraction& c) {
        cplx coef = ((word_sign + c.sign) & 1) ? -1.0 : 1.0;
        std::vector<std::pair<double, double>> win(n, {-kInf, kInf});
        for (auto [i, j] : c.left) {
            coef *= hl[j];
            win[i].first = std::max(win[i].first, left[j].S);
            win[i].second = std::min(win[i].second, left[j].T);
        }
        for (auto [i, j] : c.right) {
            coef *= hr[j];
            win[i].first = std::max(win[i].first, right[j].S);
            win[i].second = std::min(win[i].second, right[j].T);
        }
        CMat G(c.left_rest.size(), c.right_rest.size());
        for (std::size_t a = 0; a < c.left_rest.size(); ++a)
            for (std::size_t b = 0; b < c.right_rest.size(); ++b)
                G(a, b) = limit_collective_inner(bath, left[c.left_rest[a]], right[c.right_rest[b]]);
        coef *= gram_determinant(G);
        for (auto [lo, hi] : win)
            if (lo > hi) coef = 0.0;
        if (coef == 0.0) return;
        out.terms.push_back({coef, std::move(win)});
    });
    return out;
}

/// Calls fn(bits) for every bit vector of length n with at most k ones.
void for_each_sparse_bits(int n, int k, const std::function<void(const Bits&)>& fn) {
    Bits b(n, 0);
    std::function<void(int, int)> rec = [&](int start, int left) {
        fn(b);
        if (left == 0) return;
        for (int i = start; i < n; ++i) {
            b[i] = 1;
            rec(i + 1, left - 1);
            b[i] = 0;
        }
    };
    rec(0, k);
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

NoiseExpansion noise_matrix_element(const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                                    const Bits& alpha, const Bits& beta,
                                    const std::vector<NoiseLeg>& right) {
    check_legs(left);
    check_legs(right);
    const int n = int(alpha.size());
    return noise_expansion(bath, left, alpha, beta, right, sign_xi(Partition::singletons(n), alpha, beta));
}

cplx limit_leg_gram(const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                    const std::vector<NoiseLeg>& right) {
    if (left.size() != right.size()) return 0.0;
    CMat G(left.size(), right.size());
    for (std::size_t a = 0; a < left.size(); ++a)
        for (std::size_t b = 0; b < right.size(); ++b) G(a, b) = limit_collective_inner(bath, left[a], right[b]);
    return gram_determinant(G);
}

namespace {

struct OrderBound {
    double prefactor = 0.0, CLt = 0.0;
    int km = 0, kp = 0;

    double operator()(int n) const {
        double wl = 0.0, wr = 0.0, f = 1.0;
        for (int a = 0; a <= std::min(km, n); ++a) wl += double(binomial(n, a));
        for (int b = 0; b <= std::min(kp, n); ++b) wr += double(binomial(n, b));
        for (int k = 2; k <= n; ++k) f *= k;
        return prefactor * std::pow(CLt, n) / f * wl * wr;
    }
};

OrderBound make_order_bound(const SystemModel& sys, const ReservoirModel& bath,
                            const std::vector<NoiseLeg>& left, const std::vector<NoiseLeg>& right,
                            const CVec& phi1, const CVec& phi2, double t) {
    const auto lc = build_limit_coefficients(sys);
    double CL = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CL = std::max(CL, op_norm(lc.L_ab(a, b)));
    const auto g = LegProfile::coupling(1.0);
    double Ch = 1.0, Cf = 1.0;
    for (const auto* legs : {&left, &right})
        for (const auto& l : *legs) Ch = std::max(Ch, std::abs(k_inner(bath, l.profile, g)));
    for (const auto& a : left)
        for (const auto& b : right) Cf = std::max(Cf, std::abs(limit_collective_inner(bath, a, b)));
    OrderBound ob;
    ob.km = int(left.size());
    ob.kp = int(right.size());
    const int kmin = std::min(ob.km, ob.kp);
    ob.CLt = CL * t;
    ob.prefactor = phi1.norm() * phi2.norm() * factorial(ob.km) * factorial(ob.kp) *
                   std::pow(Ch, ob.km + ob.kp) * factorial(kmin) * std::pow(Cf, kmin);
    return ob;
}

}  // namespace

double qsde_order_bound(const SystemModel& sys, const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                        const std::vector<NoiseLeg>& right, const CVec& phi1, const CVec& phi2, double t,
                        int n) {
    return make_order_bound(sys, bath, left, right, phi1, phi2, t)(n);
}

namespace {

double series_tail(const std::function<double(int)>& bound, int from) {
    double total = 0.0, prev = bound(from);
    total += prev;
    for (int m = from + 1; m < from + 10000; ++m) {
        const double b = bound(m);
        total += b;
        if (b == 0.0) return total;
        const double ratio = b / prev;
        if (ratio < 0.5 && b < 1e-18 * std::max(total, 1e-300)) return total + b * ratio / (1.0 - ratio);
        prev = b;
    }
    throw ConvergenceError("series tail bound did not converge");
}

}  // namespace

QsdeResult qsde_matrix_element(const SystemModel& sys, const ReservoirModel& bath,
                               const std::vector<NoiseLeg>& left, const std::vector<NoiseLeg>& right,
                               const CVec& phi1, const CVec& phi2, double t, const QsdeOptions& opt) {
    check_legs(left);
    check_legs(right);
    require_dim(phi1.size() == sys.d() && phi2.size() == sys.d(), "qsde: state dimension mismatch");
    if (t < 0.0) throw GuardError("qsde: t must be non-negative");
    const auto lc = build_limit_coefficients(sys);
    const int km = int(left.size()), kp = int(right.size());
    const OrderBound ob = make_order_bound(sys, bath, left, right, phi1, phi2, t);
    auto bound = [&](int n) { return ob(n); };

    QsdeResult res;
    res.per_order.push_back(phi1.dot(phi2) * limit_leg_gram(bath, left, right));
    res.value = res.per_order[0];
    for (int n = 1;; ++n) {
        if (opt.N_max >= 0 && n > opt.N_max) break;
        if (opt.N_max < 0 && series_tail(bound, n) < opt.tail_tol) break;
        if (n > opt.N_cap) throw ConvergenceError("qsde: order cap reached before the tail bound converged");
        cplx order = 0.0;
        const Partition g0 = Partition::singletons(n);
        for_each_sparse_bits(n, std::min(km, n), [&](const Bits& alpha) {
            for_each_sparse_bits(n, std::min(kp, n), [&](const Bits& beta) {
                const auto noise = noise_expansion(bath, left, alpha, beta, right, sign_xi(g0, alpha, beta));
                if (noise.terms.empty()) return;
                CVec v = phi2;
                for (int i = 0; i < n; ++i) v = lc.L_ab(alpha[i], beta[i]) * v;
                const cplx sf = phi1.dot(v);
                if (sf == 0.0) return;
                order += sf * noise.integrate_simplex(t);
            });
        });
        res.per_order.push_back(order);
        res.value += order;
    }
    res.tail_bound = series_tail(bound, int(res.per_order.size()));
    for (std::size_t n = 0; n < res.per_order.size(); ++n)
        res.roundoff += 16.0 * std::numeric_limits<double>::epsilon() * double(n + 1) * std::abs(res.per_order[n]);
    return res;
}

std::pair<Bits, Bits> reindex_hat(const Bits& alpha, const Bits& beta, const Partition& g) {
    const int n = int(alpha.size());
    require_dim(int(beta.size()) == n && g.num_parts() == n, "reindex_hat: N(G) must equal n");
    if (!is_type_one(g)) throw std::invalid_argument("reindex_hat: partition must be type I");
    Bits ah(g.n(), 1), bh(g.n(), 1);
    for (int j = 0; j < n; ++j) {
        ah[g.parts()[j].back()] = alpha[j];
        bh[g.parts()[j].front()] = beta[j];
    }
    return {ah, bh};
}

cplx qsde_order_hat_form(const SystemModel& sys, const ReservoirModel& bath, const std::vector<NoiseLeg>& left,
                         const std::vector<NoiseLeg>& right, const CVec& phi1, const CVec& phi2, double t,
                         int n, int R_max) {
    check_legs(left);
    check_legs(right);
    sys.validate();
    if (n < 1 || R_max < 1) throw std::invalid_argument("hat form: n and R_max must be >= 1");
    const int km = int(left.size()), kp = int(right.size());
    cplx total = 0.0;
    std::vector<int> sizes(n, 1);
    while (true) {
        const Partition G = type_one_from_sizes(sizes);
        const int E = G.n();
        const cplx pref = std::pow(-I, E) * std::pow(sys.kappa, E - n);
        for_each_sparse_bits(n, std::min(km, n), [&](const Bits& alpha) {
            for_each_sparse_bits(n, std::min(kp, n), [&](const Bits& beta) {
                const auto [ah, bh] = reindex_hat(alpha, beta, G);
                CVec v = phi2;
                for (int k = 0; k < E; ++k) v = sys.E(ah[k], bh[k]) * v;
                const cplx sf = phi1.dot(v);
                if (sf == 0.0) return;
                const auto noise = noise_expansion(bath, left, alpha, beta, right, sign_xi(G, ah, bh));
                total += pref * sf * noise.integrate_simplex(t);
            });
        });
        int pos = 0;
        while (pos < n && sizes[pos] == R_max) sizes[pos++] = 1;
        if (pos == n) break;
        ++sizes[pos];
    }
    return total;
}

}  // namespace fermi
