#include "fermi/dyson.hpp"

#include "fermi/fock.hpp"
#include "fermi/legs.hpp"
#include "fermi/quadrature.hpp"
#include "fermi/simplex.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

namespace fermi {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Discretized evaluation means the whole term (kernel, h, collective inners)
// runs on the grid's mode sums.
ReservoirModel effective_bath(const DysonTermSpec& spec) {
    return spec.evaluator == Evaluator::Discretized ? spec.bath.with_mode(KernelMode::FiniteModes) : spec.bath;
}

cplx kernel(const ReservoirModel& bath, double u, double lambda) {
    const double l2 = lambda * lambda;
    return bath.g1(u / l2) / l2;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FERMI_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// A fully specified (alpha, beta, G, P1, P2) contribution: a constant times
/// kernel chains and h factors evaluated at the vertex times.
struct Structure {
    cplx coef;
    std::vector<std::pair<int, int>> links;  // (earlier, later) vertices
    std::vector<std::pair<int, int>> hl, hr;  // (vertex, leg)
};

struct CompiledTerm {
    int n = 0;
    std::vector<Structure> structures;
    std::vector<double> breaks;  // leg endpoints, where h has kinks
};

CompiledTerm compile(const DysonTermSpec& spec, const ReservoirModel& bath) {
    const int n = spec.n, km = int(spec.left.size()), kp = int(spec.right.size());
    CompiledTerm out;
    out.n = n;
    for (const auto* legs : {&spec.left, &spec.right})
        for (const auto& l : *legs) {
            out.breaks.push_back(l.S);
            out.breaks.push_back(l.T);
        }

    CMat inner(km, kp);
    for (int a = 0; a < km; ++a)
        for (int b = 0; b < kp; ++b) inner(a, b) = collective_inner(bath, spec.left[a], spec.right[b], spec.lambda);
    auto residual_gram = [&](const std::vector<int>& rl, const std::vector<int>& rr) {
        CMat G(rl.size(), rr.size());
        for (std::size_t a = 0; a < rl.size(); ++a)
            for (std::size_t b = 0; b < rr.size(); ++b) G(a, b) = inner(rl[a], rr[b]);
        return gram_determinant(G);
    };

    if (n == 0) {
        out.structures.push_back({spec.phi1.dot(spec.phi2) * residual_gram(
                                      [&] { std::vector<int> v(km); for (int i = 0; i < km; ++i) v[i] = i; return v; }(),
                                      [&] { std::vector<int> v(kp); for (int i = 0; i < kp; ++i) v[i] = i; return v; }()),
                                  {}, {}, {}});
        return out;
    }

    for_each_partition(n, [&](const Partition& G) {
        Bits af(n, 0), bf(n, 0);
        std::vector<int> outs, ins;
        std::vector<std::pair<int, int>> links;
        for (const auto& part : G.parts()) {
            for (std::size_t h = 0; h + 1 < part.size(); ++h) {
                links.emplace_back(part[h], part[h + 1]);
                af[part[h]] = 1;
                bf[part[h + 1]] = 1;
            }
            outs.push_back(part.back());
            ins.push_back(part.front());
        }
        const int no = int(outs.size());
        for (int om = 0; om < (1 << no); ++om) {
            if (__builtin_popcount(om) > km) continue;
            for (int im = 0; im < (1 << no); ++im) {
                if (__builtin_popcount(im) > kp) continue;
                Bits alpha = af, beta = bf, am(n, 0), bm(n, 0);
                for (int k = 0; k < no; ++k) {
                    if (om >> k & 1) alpha[outs[k]] = am[outs[k]] = 1;
                    if (im >> k & 1) beta[ins[k]] = bm[ins[k]] = 1;
                }
                CVec v = spec.phi2;
                for (int i = 0; i < n; ++i) v = spec.sys.E(alpha[i], beta[i]) * v;
                const cplx me = spec.phi1.dot(v);
                if (me == 0.0) continue;
                const int word_sign = sign_xi(G, alpha, beta);
                for_each_leg_contraction(am, bm, km, kp, [&](const LegContraction& c) {
                    const cplx gram = residual_gram(c.left_rest, c.right_rest);
                    if (gram == 0.0) return;
                    Structure s;
                    s.coef = (((word_sign + c.sign) & 1) ? -1.0 : 1.0) * me * gram;
                    s.links = links;
                    s.hl = c.left;
                    s.hr = c.right;
                    out.structures.push_back(std::move(s));
                });
            }
        }
    });
    return out;
}

/// Evaluates the summed integrand; caches kernels and h values per call.
class Integrand {
public:
    Integrand(const DysonTermSpec& spec, const ReservoirModel& bath, const CompiledTerm& term)
        : spec_(spec), bath_(bath), term_(term) {
        const int n = term.n, km = int(spec.left.size()), kp = int(spec.right.size());
        for (const auto& s : term.structures) {
            for (auto [i, j] : s.links) need_link_[i * 8 + j] = true;
            for (auto [v, l] : s.hl) need_hl_[v * 8 + l] = true;
            for (auto [v, l] : s.hr) need_hr_[v * 8 + l] = true;
        }
        (void)n;
        (void)km;
        (void)kp;
    }

    cplx operator()(const std::vector<double>& s) const {
        const int n = term_.n;
        cplx Gv[64], hlv[64], hrv[64];
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (need_link_[i * 8 + j]) Gv[i * 8 + j] = kernel(bath_, s[j] - s[i], spec_.lambda);
        for (int v = 0; v < n; ++v) {
            for (std::size_t l = 0; l < spec_.left.size(); ++l)
                if (need_hl_[v * 8 + l]) hlv[v * 8 + l] = h_function(bath_, spec_.left[l], s[v], spec_.lambda);
            for (std::size_t l = 0; l < spec_.right.size(); ++l)
                if (need_hr_[v * 8 + l])
                    hrv[v * 8 + l] = std::conj(h_function(bath_, spec_.right[l], s[v], spec_.lambda));
        }
        cplx total = 0.0;
        for (const auto& st : term_.structures) {
            cplx x = st.coef;
            for (auto [i, j] : st.links) x *= Gv[i * 8 + j];
            for (auto [v, l] : st.hl) x *= hlv[v * 8 + l];
            for (auto [v, l] : st.hr) x *= hrv[v * 8 + l];
            total += x;
        }
        return total;
    }

private:
    const DysonTermSpec& spec_;
    const ReservoirModel& bath_;
    const CompiledTerm& term_;
    bool need_link_[64] = {};
    bool need_hl_[64] = {};
    bool need_hr_[64] = {};
};

/// Iterated Gauss-Kronrod over t > s_n > ... > s_1 > 0, splitting every
/// level at the supplied breakpoints.
template <class R, class F>
std::pair<R, double> nested_simplex(int n, double t, const F& f, const std::vector<double>& breaks,
                                    double rel_tol, double abs_tol) {
    std::vector<double> s(n);
    double outer_err = 0.0;
    std::function<R(int)> level = [&](int k) -> R {
        const double hi = (k == n - 1) ? t : s[k + 1];
        std::vector<double> cuts{0.0, hi};
        for (double b : breaks)
            if (b > 0.0 && b < hi) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        // an inner error is multiplied by the volume of the outer levels
        const double outer_vol = std::pow(std::max(t, 1e-300), n - 1 - k);
        const double abs_k = (k == n - 1 ? 1.0 : 0.1) * abs_tol / outer_vol;
        const double tol = (k == n - 1) ? rel_tol : rel_tol * 0.1;
        const unsigned depth = (k == n - 1) ? 15 : 10;
        R total(0.0);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            if (cuts[c + 1] <= cuts[c]) continue;
            double err = 0.0;
            auto body = [&](double x) -> R {
                s[k] = x;
                return k == 0 ? R(f(s)) : level(k - 1);
            };
            const double share = abs_k * (cuts[c + 1] - cuts[c]) / std::max(hi, 1e-300);
            total += adaptive_gk31<R>(body, cuts[c], cuts[c + 1], tol, share, depth, &err);
            if (k == n - 1) outer_err += err;
        }
        return total;
    };
    if (n == 0) return {R(f(s)), 0.0};
    const R v = level(n - 1);
    return {v, outer_err};
}

/// Importance-sampled Monte Carlo over the simplex: a defensive mixture of
/// the uniform law and laws with one exponentially short adjacent gap.
template <class F>
std::pair<cplx, double> monte_carlo_simplex(int n, double t, double rate, const F& f, long samples,
                                            std::uint64_t seed, int threads) {
    if (n == 0) return {f(std::vector<double>{}), 0.0};
    constexpr long kChunk = 4096;
    const long chunks = std::max(1L, (samples + kChunk - 1) / kChunk);
    struct Acc {
        long N = 0;
        double mre = 0, mim = 0, m2 = 0;
    };
    std::vector<Acc> acc(chunks);
    const double uni = factorial(n) / std::pow(t, n);
    const double w0 = n > 1 ? 0.5 : 1.0, wk = n > 1 ? 0.5 / (n - 1) : 0.0;
    const double tail_mass = -std::expm1(-rate * t);

    auto run_chunk = [&](long c) {
        std::mt19937_64 rng(splitmix(seed ^ splitmix(std::uint64_t(n) << 40 | std::uint64_t(c))));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> s(n), y(std::max(n - 1, 1));
        Acc a;
        const long m = std::min(kChunk, samples - c * kChunk);
        for (long it = 0; it < m; ++it) {
            const double pick = U(rng);
            if (pick < w0) {
                for (double& x : s) x = t * U(rng);
                std::sort(s.begin(), s.end());
            } else {
                const int k = std::min(n - 2, int((pick - w0) / wk));  // gap between s[k] and s[k+1]
                const double u = -std::log1p(-U(rng) * tail_mass) / rate;
                for (int i = 0; i < n - 1; ++i) y[i] = (t - u) * U(rng);
                std::sort(y.begin(), y.begin() + (n - 1));
                for (int i = 0; i <= k; ++i) s[i] = y[i];
                for (int i = k + 1; i < n; ++i) s[i] = y[i - 1] + u;
            }
            double q = w0 * uni;
            for (int k = 0; k + 1 < n; ++k) {
                const double u = s[k + 1] - s[k];
                q += wk * rate * std::exp(-rate * u) / tail_mass * factorial(n - 1) / std::pow(t - u, n - 1);
            }
            const cplx x = f(s) / q;
            ++a.N;
            const double dre = x.real() - a.mre, dim = x.imag() - a.mim;
            a.mre += dre / a.N;
            a.mim += dim / a.N;
            a.m2 += dre * (x.real() - a.mre) + dim * (x.imag() - a.mim);
        }
        acc[c] = a;
    };

    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    const int nt = std::max(1, std::min<int>(threads, int(chunks)));
    for (int w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            for (long c; (c = next++) < chunks;) run_chunk(c);
        });
    for (auto& th : pool) th.join();

    // merge in chunk order so the result does not depend on the thread count
    Acc tot;
    for (const auto& a : acc) {
        if (a.N == 0) continue;
        const long N = tot.N + a.N;
        const double dre = a.mre - tot.mre, dim = a.mim - tot.mim;
        tot.m2 += a.m2 + (dre * dre + dim * dim) * double(tot.N) * a.N / N;
        tot.mre += dre * a.N / N;
        tot.mim += dim * a.N / N;
        tot.N = N;
    }
    const double var = tot.N > 1 ? tot.m2 / (tot.N - 1) : 0.0;
    return {cplx(tot.mre, tot.mim), std::sqrt(var / tot.N)};
}

double decay_rate(const ReservoirModel& bath, double lambda) {
    const double l2 = lambda * lambda;
    if (auto ek = bath.exponential_kernel()) return ek->z.real() / l2;
    double kb;
    try {
        kb = bath.kbar();
    } catch (const GuardError&) {
        kb = 1.0 / std::max(bath.band_hi() - bath.band_lo(), 1e-12);
    }
    return std::abs(bath.g1(0.0)) / std::max(kb, 1e-300) / l2;
}

}  // namespace

void DysonTermSpec::validate() const {
    if (n < 0 || n > 5) throw GuardError("dyson term: order must lie in [0, 5]");
    if (!(t >= 0.0)) throw GuardError("dyson term: t must be non-negative");
    if (!(lambda > 0.0)) throw GuardError("dyson term: lambda must be positive");
    const int d = sys.d();
    for (const CMat* m : {&sys.E00, &sys.E01, &sys.E10, &sys.E11})
        require_dim(m->rows() == d && m->cols() == d && d > 0, "dyson term: E_ab must be d x d");
    require_dim(phi1.size() == d && phi2.size() == d, "dyson term: state dimension mismatch");
    if (left.size() > 6 || right.size() > 6) throw GuardError("dyson term: at most 6 legs per side");
    for (const auto* legs : {&left, &right})
        for (const auto& l : *legs)
            if (!(l.T > l.S)) throw GuardError("dyson term: legs need S < T");
    if (evaluator == Evaluator::Discretized) {
        const double l2 = lambda * lambda;
        bath.check_window(t / l2, "dyson term");
        for (const auto* legs : {&left, &right})
            for (const auto& l : *legs)
                bath.check_window((std::max(std::abs(l.T), t) + std::abs(l.S)) / l2, "dyson term legs");
    }
}

cplx dyson_integrand(const DysonTermSpec& spec, const std::vector<double>& s) {
    spec.validate();
    require_dim(int(s.size()) == spec.n, "dyson integrand: wrong number of times");
    const auto bath = effective_bath(spec);
    const auto term = compile(spec, bath);
    return Integrand(spec, bath, term)(s);
}

DysonTermResult dyson_term(const DysonTermSpec& spec, const IntegratorOptions& opt) {
    spec.validate();
    const auto bath = effective_bath(spec);
    const auto term = compile(spec, bath);
    const Integrand f(spec, bath, term);

    DysonTermResult res;
    res.structures = int(term.structures.size());
    res.scheme = opt.scheme;
    if (res.scheme == SimplexScheme::Auto) res.scheme = spec.n <= 3 ? SimplexScheme::Nested : SimplexScheme::MonteCarlo;
    if (term.structures.empty()) {
        res.value = 0.0;
        return res;
    }
    if (res.scheme == SimplexScheme::Nested) {
        if (spec.n > 3) throw GuardError("dyson term: nested quadrature is limited to n <= 3");
        auto [v, e] = nested_simplex<cplx>(spec.n, spec.t, f, term.breaks, opt.rel_tol, opt.abs_tol);
        res.value = v;
        res.std_err = e;
    } else {
        auto [v, e] = monte_carlo_simplex(spec.n, spec.t, decay_rate(bath, spec.lambda), f, opt.samples, opt.seed,
                                          resolve_threads(opt.threads));
        res.value = v;
        res.std_err = e;
    }
    return res;
}

double chain_integral(const ReservoirModel& bath, const Partition& G, double t, double lambda, Evaluator ev) {
    const int n = G.n();
    if (!(lambda > 0.0) || t < 0.0) throw GuardError("chain integral: need lambda > 0 and t >= 0");
    const double l2 = lambda * lambda;
    const auto model = ev == Evaluator::Discretized ? bath.with_mode(KernelMode::FiniteModes) : bath;
    if (ev == Evaluator::Discretized) bath.check_window(t / l2, "chain integral");
    if (auto ek = model.exponential_kernel()) {
        // gap coordinates: the integrand is exp(-sum_k c_k u_k) over the
        // simplex sum u = t, whose volume integral is a divided difference
        std::vector<int> cover(n + 1, 0);
        int links = 0;
        for (const auto& part : G.parts())
            for (std::size_t h = 0; h + 1 < part.size(); ++h) {
                ++links;
                for (int k = part[h] + 1; k <= part[h + 1]; ++k) ++cover[k];
            }
        std::vector<cplx> nodes(n + 1);
        for (int k = 0; k <= n; ++k) nodes[k] = -ek->z.real() / l2 * cover[k] * t;
        const double pre = std::pow(std::abs(ek->A) / l2, links) * std::pow(t, n);
        return pre * exp_divided_difference(nodes).real();
    }
    if (n > 3) throw GuardError("chain integral: n > 3 needs an exponential kernel");
    auto f = [&](const std::vector<double>& s) {
        double x = 1.0;
        for (const auto& part : G.parts())
            for (std::size_t h = 0; h + 1 < part.size(); ++h)
                x *= std::abs(model.g1((s[part[h + 1]] - s[part[h]]) / l2)) / l2;
        return x;
    };
    return nested_simplex<double>(n, t, f, {}, 1e-9, 0.0).first;
}

std::vector<double> type_two_decay(const ReservoirModel& bath, const Partition& G, double t,
                                   const std::vector<double>& lambdas, Evaluator ev) {
    if (is_type_one(G)) throw std::invalid_argument("type_two_decay: partition is type I");
    std::vector<double> out;
    for (double l : lambdas) out.push_back(chain_integral(bath, G, t, l, ev));
    return out;
}

BoundConstants bound_constants(const DysonTermSpec& spec) {
    const auto bath = effective_bath(spec);
    BoundConstants c;
    c.km = int(spec.left.size());
    c.kp = int(spec.right.size());
    c.kbar = spec.bath.kbar();
    c.C11 = op_norm(spec.sys.E11);
    c.C = std::max({op_norm(spec.sys.E00), op_norm(spec.sys.E01), op_norm(spec.sys.E10), c.C11});
    c.phi_norms = spec.phi1.norm() * spec.phi2.norm();
    for (const auto* legs : {&spec.left, &spec.right})
        for (const auto& l : *legs) c.Ch = std::max(c.Ch, h_bound(spec.bath, l.profile));
    for (const auto& a : spec.left)
        for (const auto& b : spec.right) {
            if (a.profile.kind != LegProfile::Kind::Coupling || b.profile.kind != LegProfile::Kind::Coupling)
                throw GuardError("truncation bound: box profiles have no absolute kernel bound");
            const double cross = std::abs(a.profile.coefficient * b.profile.coefficient) * 2.0 * c.kbar;
            c.Cf = std::max(c.Cf, (a.T - a.S) * cross);
        }
    return c;
}

namespace {

double leg_prefactor(const BoundConstants& c) {
    const int kmin = std::min(c.km, c.kp);
    return c.phi_norms * factorial(kmin) * std::pow(c.Cf, kmin) * factorial(c.km) * factorial(c.kp) *
           std::pow(2.0 * c.Ch, c.km + c.kp);
}

// Weight of one part of size j in the operator-norm estimate.
double part_weight(const BoundConstants& c, int j) {
    return j == 1 ? 4.0 * c.C : 4.0 * c.C * c.C * std::pow(c.C11, j - 2);
}

// Relaxed partition sum for orders 0..nmax. Summed over all partitions with
// occupation numbers n_j, the chain integrals are at most
// t^N Kbar^{E-N} / prod_j n_j!, so the order-n sum is the x^n coefficient of
// exp(sum_j c_j x^j) with c_j = w(j) Kbar^{j-1} t.
std::vector<double> relaxed_sums(const BoundConstants& c, int nmax, double t, double kb) {
    std::vector<double> cj(nmax + 1, 0.0), b(nmax + 1, 0.0);
    for (int j = 1; j <= nmax; ++j) cj[j] = part_weight(c, j) * std::pow(kb, j - 1) * t;
    b[0] = 1.0;
    for (int m = 1; m <= nmax; ++m) {
        double acc = 0.0;
        for (int j = 1; j <= m; ++j) acc += j * cj[j] * b[m - j];
        b[m] = acc / m;
    }
    return b;
}

// Orders that are enumerated partition by partition.
int exact_orders(const DysonTermSpec& spec) { return effective_bath(spec).exponential_kernel() ? 8 : 3; }

double order_bound(const DysonTermSpec& spec, const BoundConstants& c, int n) {
    double sum = 0.0;
    if (n == 0) {
        sum = 1.0;
    } else if (n <= exact_orders(spec)) {
        for_each_partition(n, [&](const Partition& G) {
            double w = 1.0;
            for (const auto& part : G.parts()) w *= part_weight(c, int(part.size()));
            sum += w * chain_integral(spec.bath, G, spec.t, spec.lambda, spec.evaluator);
        });
    } else {
        sum = relaxed_sums(c, n, spec.t, c.kbar)[n];
    }
    return leg_prefactor(c) * sum;
}

BoundConstants checked_constants(const DysonTermSpec& spec) {
    const auto c = bound_constants(spec);
    if (!(c.kbar * c.C11 < 1.0))
        throw GuardError("truncation bound: Kbar ||E11|| = " + std::to_string(c.kbar * c.C11) + " must be < 1");
    return c;
}

}  // namespace

double truncation_bound(const DysonTermSpec& spec, int n) {
    if (n < 0) throw std::invalid_argument("truncation bound: n must be >= 0");
    return order_bound(spec, checked_constants(spec), n);
}

DysonSumResult dyson_partial_sum(const DysonTermSpec& spec, int N_max, const IntegratorOptions& opt) {
    if (N_max < 0 || N_max > 5) throw GuardError("dyson sum: N_max must lie in [0, 5]");
    const auto c = checked_constants(spec);
    DysonSumResult res;
    double var = 0.0;
    cplx phase = 1.0;
    for (int n = 0; n <= N_max; ++n) {
        DysonTermSpec s = spec;
        s.n = n;
        const auto r = dyson_term(s, opt);
        res.per_order.push_back(phase * r.value);
        res.value += res.per_order.back();
        var += r.std_err * r.std_err;
        phase *= -I;
    }
    res.std_err = std::sqrt(var);

    // enumerated orders first, then the relaxed sequence until it is negligible
    double tail = 0.0;
    const int ne = exact_orders(spec);
    for (int n = N_max + 1; n <= ne; ++n) tail += order_bound(spec, c, n);
    const double pre = leg_prefactor(c);
    bool done = false;
    for (int nmax = 64; !done; nmax *= 2) {
        if (nmax > (1 << 15)) throw ConvergenceError("dyson sum: tail bound did not converge");
        const auto b = relaxed_sums(c, nmax, spec.t, c.kbar);
        double part = 0.0;
        for (int n = std::max(N_max, ne) + 1; n <= nmax; ++n) {
            const double x = pre * b[n];
            part += x;
            const double r = x / (pre * b[n - 1]);
            if (n > 2 * ne && (x == 0.0 || (r < 0.9 && x < 1e-16 * (tail + part)))) {
                if (x > 0.0) part += x * r / (1.0 - r);
                done = true;
                break;
            }
        }
        if (done) tail += part;
    }
    res.tail_bound = tail;
    return res;
}

}  // namespace fermi
