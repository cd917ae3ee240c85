// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "checks.hpp"

#include "fermi/combinatorics.hpp"
#include "fermi/dyson.hpp"
#include "fermi/limit.hpp"
#include "fermi/wick.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#ifndef FERMI_CONFIG_DIR
#define FERMI_CONFIG_DIR "configs"
#endif

using namespace fermi;
using namespace fermi::lab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Outcome a1() {
    double anti = 0.0, cc = 0.0;
    for (int m = 4; m <= 6; ++m) {
        const auto r = car_check(m, 100, 100 + m);
        anti = std::max(anti, r.anti_err);
        cc = std::max(cc, r.create_err);
    }
    return {anti <= 1e-12 && cc == 0.0, "max|{A-(f),A+(g)}-<f|g>I| = " + fmt("%.2e", anti) + ", max|{A+,A+}| = " + fmt("%.1e", cc)};
}

Outcome a2() {
    // every bit pattern up to length 4, then random instances of both forms
    std::mt19937_64 rng(7);
    const int M = 5;
    ModeSpace space(M);
    double word = 0.0;
    for (int n = 1; n <= 4; ++n)
        for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
            OperatorWord w;
            for (int i = 0; i < n; ++i)
                w.factors.push_back({random_vector(rng, M), random_vector(rng, M), (mask >> i) & 1, (mask >> (n + i)) & 1});
            word = std::max(word, max_abs(dense_normal_form(space, w, normal_order_word(w)).entries - dense_word(space, w).entries));
        }
    const auto r = wick_random_check(4, M, 200, 11);
    word = std::max(word, r.word_err);
    return {word <= 1e-10 && r.block_err <= 1e-10,
            "word " + fmt("%.2e", word) + ", two-block " + fmt("%.2e", r.block_err)};
}

Outcome a3() {
    const auto g = Partition::from_one_based(5, {{1, 4}, {2, 3, 5}});
    const std::string xi = xi_expression(g);
    bool ok = xi == "β₂α₁+β₄α₃+β₅α₄" && g.g_out() == std::vector<int>{3, 4} && g.g_in() == std::vector<int>{0, 1};
    int checked = 0;
    for (int n = 1; n <= 4; ++n) {
        const auto s = Partition::singletons(n);
        for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
            Bits a(n), b(n);
            for (int i = 0; i < n; ++i) a[i] = (mask >> i) & 1, b[i] = (mask >> (n + i)) & 1;
            int ref = 0;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < j; ++i) ref += b[j] * a[i];
            ok = ok && ((sign_xi(s, a, b) - ref) % 2 == 0);
            ++checked;
        }
    }
    return {ok, "xi = " + xi + ", " + std::to_string(checked) + " singleton patterns"};
}

Outcome a4() {
    const long bell[] = {1, 2, 5, 15, 52};
    bool ok = true;
    std::ostringstream os;
    for (int n = 1; n <= 5; ++n) {
        long count = 0;
        for_each_partition(n, [&](const Partition&) { ++count; });
        ok = ok && count == bell[n - 1] && long(enumerate_partitions(n).size()) == count;
        os << count << (n < 5 ? "," : "");
    }
    for (int n = 1; n <= 6; ++n) {
        long t1 = 0;
        for_each_partition(n, [&](const Partition& g) { t1 += is_type_one(g); });
        ok = ok && t1 == (1L << (n - 1)) && long(enumerate_type_one(n).size()) == t1;
    }
    const long p22 = long(enumerate_matchings(2, 2).size()), p33 = long(enumerate_matchings(3, 3).size());
    ok = ok && p22 == 7 && p33 == 34 && matching_count(2, 2) == p22 && matching_count(3, 3) == p33;
    return {ok, "Bell " + os.str() + "; |P(2,2)|=" + std::to_string(p22) + ", |P(3,3)|=" + std::to_string(p33)};
}

Outcome a5() {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    bool resum = true;
    for (int k = 0; k < 100; ++k) {
        const int d = 1 + k % 4;
        const cplx kappa(0.1 + u(rng), 2.0 * u(rng) - 1.0);
        CMat E11 = random_hermitian(rng, d);
        E11 *= 0.7 * u(rng) / (std::abs(kappa) * std::max(op_norm(E11), 1e-300));
        const auto sys = SystemModel::make(random_hermitian(rng, d), random_matrix(rng, d, d), E11, kappa);
        const auto c = build_limit_coefficients(sys);
        const CMat Id = CMat::Identity(d, d);
        worst = std::max({worst, max_abs(c.W.adjoint() * c.W - Id), max_abs(c.L_ab(1, 0) - c.L),
                          max_abs(c.L_ab(0, 1) + c.L.adjoint() * c.W), max_abs(c.L_ab(1, 1) - (c.W - Id) / c.gamma),
                          max_abs(c.H_eff - c.H_eff.adjoint())});
        for (int n = 1; n <= 3; ++n) {
            Bits a(n), b(n);
            for (int i = 0; i < n; ++i) a[i] = u(rng) < 0.5, b[i] = u(rng) < 0.5;
            resum = resum && resummation_check(sys, a, b, 40).pass;
        }
    }
    return {worst <= 1e-12 && resum, "identity residual " + fmt("%.2e", worst) + ", resummation " + (resum ? "within" : "outside") + " tail bound"};
}

Outcome a6() {
    const auto cfg = load_config(std::string(FERMI_CONFIG_DIR) + "/twolevel.json");
    const auto gauge = load_config(std::string(FERMI_CONFIG_DIR) + "/twolevel_gauge.json");
    const auto s1 = convergence_sweep(cfg, true, 0);
    const auto s2 = convergence_sweep(gauge, false, 0);
    const auto& last = *std::min_element(s1.points.begin(), s1.points.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
    const bool within = last.gap <= 3.0 * last.budget();
    std::ostringstream os;
    os << "gaps";
    for (const auto& p : s1.points) os << " " << fmt("%.4g", p.gap);
    os << (s1.monotone ? " (decreasing)" : " (NOT decreasing)") << "; gauge sweep";
    for (const auto& p : s2.points) os << " " << fmt("%.4g", p.gap);
    os << (s2.monotone ? " (decreasing)" : " (NOT decreasing)");
    os << "; lambda=0.25 gap " << fmt("%.3g", last.gap) << " vs 3x budget " << fmt("%.3g", 3.0 * last.budget()) << " (ode "
       << fmt("%.2g", last.ode_err) << ", disc " << fmt("%.2g", last.disc_err) << ", tail " << fmt("%.2g", last.tail) << ")";
    return {s1.monotone && s2.monotone && within, os.str()};
}

Outcome a7() {
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.0}, 0.0);
    const auto two = Partition::from_one_based(4, {{1, 3}, {2, 4}});
    const auto one = Partition::from_one_based(4, {{1, 2}, {3, 4}});
    const std::vector<double> lams{0.5, 0.25, 0.125};
    const auto v2 = type_two_decay(bath, two, 1.0, lams);
    std::vector<double> v1;
    for (double l : lams) v1.push_back(chain_integral(bath, one, 1.0, l));
    const bool halving = v2[0] >= 2.0 * v2[1] && v2[1] >= 2.0 * v2[2];
    const double drift = std::abs(v1[2] - v1[1]) / v1[2];
    const bool plateau = v1[2] > 0.0 && drift <= 0.1 && std::abs(v1[2] - v1[1]) < std::abs(v1[1] - v1[0]);
    return {halving && plateau, "type II " + fmt("%.3e", v2[0]) + " " + fmt("%.3e", v2[1]) + " " + fmt("%.3e", v2[2]) +
                                    "; type I " + fmt("%.4f", v1[0]) + " " + fmt("%.4f", v1[1]) + " " + fmt("%.4f", v1[2])};
}

Outcome a8() {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> legs(0, 2), dim(1, 3);
    bool dominated = true, summable = true;
    double worst_frac = 0.0, worst_ratio = 0.0;
    for (int k = 0; k < 20; ++k) {
        DysonTermSpec s;
        s.bath = ReservoirModel(Lorentzian{0.5 + u(rng), 1.0 + 3.0 * u(rng), 2.0 * u(rng) - 1.0}, 0.0);
        const int d = dim(rng);
        CMat E11 = random_hermitian(rng, d);
        E11 *= 0.5 * u(rng) / (s.bath.kbar() * op_norm(E11));
        s.sys = SystemModel::make(0.5 * random_hermitian(rng, d), 0.5 * random_matrix(rng, d, d), E11, s.bath.kappa());
        s.t = 0.3 + 0.7 * u(rng);
        s.lambda = 0.3 + 0.5 * u(rng);
        s.phi1 = random_vector(rng, d).normalized();
        s.phi2 = random_vector(rng, d).normalized();
        for (auto* side : {&s.left, &s.right})
            for (int i = legs(rng); i > 0; --i) {
                const double a = u(rng) * s.t, b = u(rng) * s.t;
                side->push_back({LegProfile::coupling(cplx(u(rng), u(rng))), std::min(a, b), std::max(a, b) + 1e-3});
            }
        // accuracy far below the bound is all dominance needs
        IntegratorOptions opt;
        opt.scheme = SimplexScheme::Nested;
        opt.rel_tol = 1e-6;
        opt.abs_tol = 1e-9;
        for (int n = 0; n <= 3; ++n) {
            s.n = n;
            const double b = truncation_bound(s, n), v = std::abs(dyson_term(s, opt).value);
            dominated = dominated && v <= b * (1.0 + 1e-12);
            worst_frac = std::max(worst_frac, v / b);
        }
        double r = 0.0;
        summable = summable && bound_ratio_test(s, &r);
        worst_ratio = std::max(worst_ratio, r);
    }
    return {dominated && summable, "max |term|/bound " + fmt("%.3f", worst_frac) + ", max final bound ratio " + fmt("%.3f", worst_ratio)};
}

Outcome a9() {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ReservoirModel bath(Lorentzian{1.0, 2.0, 0.3}, 0.0);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int d = 1 + k % 3;
        CMat E11 = random_hermitian(rng, d);
        E11 *= 0.5 * u(rng) / (std::abs(bath.kappa()) * op_norm(E11));
        const auto sys = SystemModel::make(0.5 * random_hermitian(rng, d), 0.5 * random_matrix(rng, d, d), E11, bath.kappa());
        const CVec p1 = random_vector(rng, d).normalized(), p2 = random_vector(rng, d).normalized();
        const CMat L00 = build_limit_coefficients(sys).L_ab(0, 0);
        for (double t : {0.5, 1.0, 1.5, 2.0}) {
            const CMat ex = (L00 * t).exp();
            const cplx ref = p1.dot(ex * p2);
            worst = std::max(worst, std::abs(qsde_matrix_element(sys, bath, {}, {}, p1, p2, t).value - ref));
        }
    }
    return {worst <= 1e-8, "max |qsde - <phi1|exp(-Kt)phi2>| = " + fmt("%.2e", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}};
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << fmt("%.1f", sec) << " s]"
                  << std::endl;
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
