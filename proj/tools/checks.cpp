#include "checks.hpp"

#include "fermi/fock.hpp"
#include "fermi/limit.hpp"
#include "fermi/oracle.hpp"
#include "fermi/wick.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <sstream>
#include <thread>

namespace fermi::lab {

namespace {

double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string sub(int k) {
    static const char* digits[] = {"₀", "₁", "₂", "₃", "₄", "₅", "₆", "₇", "₈", "₉"};
    std::string out;
    for (char c : std::to_string(k)) out += digits[c - '0'];
    return out;
}

std::string set_text(const std::vector<int>& xs) {
    std::string s = "{";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i] + 1);
    return s + "}";
}

}  // namespace

CVec random_vector(std::mt19937_64& rng, int m, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(m);
    for (int k = 0; k < m; ++k) v(k) = cplx(nd(rng), nd(rng));
    return v;
}

CMat random_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> nd;
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

CMat random_hermitian(std::mt19937_64& rng, int d) {
    CMat a = random_matrix(rng, d, d);
    return 0.5 * (a + a.adjoint());
}

CarReport car_check(int modes, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModeSpace space(modes);
    const CMat Id = CMat::Identity(space.dim(), space.dim());
    CarReport r;
    r.trials = trials;
    for (int k = 0; k < trials; ++k) {
        const CVec f = random_vector(rng, modes), g = random_vector(rng, modes);
        const auto af = annihilation(space, f), cf = creation(space, f), cg = creation(space, g);
        r.anti_err = std::max(r.anti_err, max_abs(anticommutator(af, cg).entries - f.dot(g) * Id));
        r.create_err = std::max(r.create_err, max_abs(anticommutator(cf, cg).entries));
    }
    return r;
}

WickReport wick_random_check(int max_len, int modes, int instances, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(0.6);
    std::uniform_int_distribution<int> len(1, max_len), blk(0, 3);
    ModeSpace space(modes);
    WickReport r;
    r.instances = instances;
    for (int k = 0; k < instances; ++k) {
        OperatorWord w;
        const int n = len(rng);
        for (int i = 0; i < n; ++i)
            w.factors.push_back({random_vector(rng, modes), random_vector(rng, modes), int(bit(rng)), int(bit(rng))});
        const auto nf = normal_order_word(w);
        r.word_err = std::max(r.word_err, max_abs(dense_normal_form(space, w, nf).entries - dense_word(space, w).entries));

        std::vector<Annihilator> gs;
        std::vector<Creator> fs;
        std::vector<CVec> cv, av;
        for (int j = blk(rng); j > 0; --j) {
            gs.push_back({random_vector(rng, modes), int(bit(rng))});
            av.push_back(gs.back().g);
        }
        for (int i = blk(rng); i > 0; --i) {
            fs.push_back({random_vector(rng, modes), int(bit(rng))});
            cv.push_back(fs.back().f);
        }
        const auto bf = normal_order_two_block(gs, fs);
        r.block_err = std::max(r.block_err, max_abs(bf.to_dense(space, cv, av).entries - dense_two_block(space, gs, fs).entries));
    }
    return r;
}

std::string xi_expression(const Partition& g) {
    std::string s;
    for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < j; ++i)
            if (crosses(g, j, i)) s += (s.empty() ? "" : "+") + std::string("β") + sub(j + 1) + "α" + sub(i + 1);
    return s.empty() ? "0" : s;
}

std::string sign_demo_text() {
    const auto g = Partition::from_one_based(5, {{1, 4}, {2, 3, 5}});
    std::ostringstream os;
    os << "G = " << g.to_string() << "\n";
    os << "ξ = " << xi_expression(g) << "\n";
    os << "G_out = " << set_text(g.g_out()) << "\n";
    os << "G_in = " << set_text(g.g_in()) << "\n";
    return os.str();
}

bool bound_ratio_test(const DysonTermSpec& spec, double* last) {
    double r = 0.0, prev = 1e300;
    bool falling = true;
    for (int n = 50; n <= 1600; n *= 2) {
        const double b0 = truncation_bound(spec, n), b1 = truncation_bound(spec, n + 1);
        if (!(b0 > 0.0)) break;
        r = b1 / b0;
        falling = falling && r <= prev;
        prev = r;
    }
    if (last) *last = r;
    return falling && r < 1.0;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FERMI_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ReservoirModel regrid(const ReservoirModel& b, GridSpec g) { return ReservoirModel(b.family(), b.omega(), g, b.mode()); }

cplx finite_me(const ExperimentConfig& cfg, const ReservoirModel& bath, double lambda, double tol, OracleResult* out = nullptr) {
    auto run = cfg.propagator_run(lambda);
    run.bath = bath;
    run.opt.rel_tol = run.opt.abs_tol = tol;
    auto r = oracle_matrix_element(run, cfg.left, cfg.right, cfg.phi1, cfg.phi2);
    if (out) *out = r;
    return r.value;
}

ConvergencePoint run_point(const ExperimentConfig& cfg, double lambda, const QsdeResult& lim, bool with_budget) {
    ConvergencePoint p;
    p.lambda = lambda;
    p.limit = lim.value;
    p.tail = lim.tail_bound + lim.roundoff;
    OracleResult r;
    p.finite = finite_me(cfg, cfg.bath, lambda, cfg.run.tolerance, &r);
    p.gap = std::abs(p.finite - p.limit);
    p.drift = r.norm_drift;
    p.leakage = r.leakage;
    p.steps = r.steps;
    p.ode_err = p.drift + p.leakage;
    if (with_budget) {
        p.ode_err += std::abs(finite_me(cfg, cfg.bath, lambda, cfg.run.tolerance * 1e-2) - p.finite);
        GridSpec g = cfg.bath.grid();
        const GridSpec finer{2 * g.points, g.half_span}, wider{2 * g.points, 2 * g.half_span};
        const double d1 = std::abs(finite_me(cfg, regrid(cfg.bath, finer), lambda, cfg.run.tolerance) - p.finite);
        const double d2 = std::abs(finite_me(cfg, regrid(cfg.bath, wider), lambda, cfg.run.tolerance) - p.finite);
        p.disc_err = std::max(d1, d2);
    }
    return p;
}

}  // namespace

ConvergenceSweep convergence_sweep(const ExperimentConfig& cfg, bool with_budget, int threads) {
    const auto lim = qsde_matrix_element(cfg.sys, cfg.bath, cfg.left, cfg.right, cfg.phi1, cfg.phi2, cfg.run.t);
    const auto& lams = cfg.run.lambdas;
    ConvergenceSweep sw;
    sw.points.resize(lams.size());
    // each worker writes its own slot; results do not depend on the thread count
    const int nt = std::min<int>(resolve_threads(threads), int(lams.size()));
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < nt; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < lams.size(); i += nt) sw.points[i] = run_point(cfg, lams[i], lim, with_budget);
        }));
    for (auto& j : jobs) j.get();

    // monotone in the order of decreasing lambda
    std::vector<ConvergencePoint> sorted = sw.points;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.lambda > b.lambda; });
    sw.monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (!(sorted[i].gap < sorted[i - 1].gap)) sw.monotone = false;
    return sw;
}

}  // namespace fermi::lab
