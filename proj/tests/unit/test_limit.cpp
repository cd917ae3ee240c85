#include "fermi/limit.hpp"
#include "fermi/simplex.hpp"
#include "pairing_oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

using namespace fermi;
using namespace fermi::testing;

namespace {

SystemModel random_system(std::mt19937_64& rng, int d, cplx kappa, double q) {
    CMat E11 = random_hermitian(rng, d);
    E11 *= q / (std::abs(kappa) * op_norm(E11));
    return SystemModel::make(random_hermitian(rng, d), random_mat(rng, d, d), E11, kappa);
}

ReservoirModel bath() { return ReservoirModel(Lorentzian{1.0, 2.0, 0.5}, 0.0); }

}  // namespace

TEST_CASE("coefficients without gauge coupling") {
    std::mt19937_64 rng(1);
    auto sys = SystemModel::make(random_hermitian(rng, 2), random_mat(rng, 2, 2), CMat::Zero(2, 2), cplx(0.5, 0.2));
    auto c = build_limit_coefficients(sys);
    CHECK(max_abs(c.W - CMat::Identity(2, 2)) < 1e-15);
    CHECK(max_abs(c.L + I * sys.E10) < 1e-15);
    const CMat K = I * sys.E00 + sys.kappa * sys.E01 * sys.E10;
    CHECK(max_abs(c.L_ab(0, 0) + K) < 1e-15);
    CHECK(max_abs(c.K - K) < 1e-15);
    CHECK(max_abs(c.H_eff - (sys.E00 + sys.kappa.imag() * sys.E01 * sys.E10)) < 1e-14);
}

TEST_CASE("scalar W") {
    CMat one = CMat::Constant(1, 1, 1.0);
    auto sys = SystemModel::make(one, one, one, 1.0);
    // ||kappa E11|| = 1 sits on the boundary of the guard
    CHECK_THROWS_AS(build_limit_coefficients(sys), GuardError);
    sys.kappa = 0.999999;
    auto c = build_limit_coefficients(sys);
    CHECK(std::abs(c.W(0, 0) - cplx(0.0, -1.0)) < 2e-6);
    CHECK(std::abs(std::abs(c.W(0, 0)) - 1.0) < 1e-14);
}

TEST_CASE("coefficient identities on random models") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 4;
        auto sys = random_system(rng, d, cplx(0.4 + 0.05 * trial, -0.3 + 0.04 * trial), 0.7);
        auto c = build_limit_coefficients(sys);
        const CMat Id = CMat::Identity(d, d);
        CHECK(max_abs(c.W.adjoint() * c.W - Id) <= 1e-12);
        CHECK(max_abs(c.L_ab(1, 0) - c.L) <= 1e-12);
        CHECK(max_abs(c.L_ab(0, 1) + c.L.adjoint() * c.W) <= 1e-12);
        CHECK(max_abs(c.L_ab(1, 1) - (c.W - Id) / c.gamma) <= 1e-12);
        CHECK(max_abs(c.H_eff - c.H_eff.adjoint()) <= 1e-12);
        // closed form H_eff = E00 + E01 M E10
        const double ik = sys.kappa.imag(), k2 = std::norm(sys.kappa);
        const CMat num = ik * Id - k2 * sys.E11;
        const CMat den = Id - 2.0 * ik * sys.E11 + k2 * sys.E11 * sys.E11;
        CHECK(max_abs(c.H_eff - (sys.E00 + sys.E01 * num * den.inverse() * sys.E10)) <= 1e-12);
    }
}

TEST_CASE("system model guards") {
    std::mt19937_64 rng(2);
    auto sys = random_system(rng, 2, 0.5, 0.5);
    CHECK_NOTHROW(sys.validate());
    auto bad = sys;
    bad.E00(0, 1) += 1.0;
    CHECK_THROWS_AS(bad.validate(), GuardError);
    bad = sys;
    bad.E01 = 2.0 * bad.E01;
    CHECK_THROWS_AS(bad.validate(), GuardError);
    bad = sys;
    bad.E11 *= 3.0;
    CHECK_THROWS_AS(bad.validate(), GuardError);
}

TEST_CASE("L_r generator and tail") {
    std::mt19937_64 rng(3);
    auto sys = random_system(rng, 3, cplx(0.5, 0.3), 0.6);
    CHECK(max_abs(build_L_r(sys, 1, 0, 1) + I * sys.E10) < 1e-15);
    CHECK(max_abs(build_L_r(sys, 0, 1, 2) + sys.kappa * sys.E01 * sys.E11) < 1e-14);
    auto c = build_limit_coefficients(sys);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int R : {3, 10, 25}) {
                CMat partial = CMat::Zero(3, 3);
                for (int r = 1; r <= R; ++r) partial += build_L_r(sys, a, b, r);
                CHECK(op_norm(c.L_ab(a, b) - partial) <= L_r_tail_bound(sys, a, b, R) + 1e-13);
            }
}

TEST_CASE("type-I resummation") {
    std::mt19937_64 rng(4);
    auto sys = random_system(rng, 2, cplx(0.6, 0.2), 0.5);
    auto r1 = resummation_check(sys, {1}, {1}, 40);
    CHECK(r1.pass);
    for (Bits a : {Bits{0, 1}, Bits{1, 1}})
        for (Bits b : {Bits{1, 0}, Bits{1, 1}}) {
            auto r = resummation_check(sys, a, b, 30);
            CHECK(r.pass);
            CHECK(r.residual <= 1e-7);
        }
    auto sys0 = sys;
    sys0.E11.setZero();
    auto r3 = resummation_check(sys0, {1, 0, 1}, {1, 1, 0}, 5);
    CHECK(r3.residual <= 1e-14);
    CHECK(r3.tail_bound == 0.0);
    // truncating too early is caught
    auto bad = resummation_check(sys, {1, 1}, {1, 1}, 2);
    CHECK(bad.residual > 1e-6);
}

TEST_CASE("hatted reindexing") {
    CHECK(reindex_hat({1, 0}, {0, 1}, Partition::singletons(2)) == std::pair<Bits, Bits>{{1, 0}, {0, 1}});
    auto [ah, bh] = reindex_hat({0}, {1}, Partition(2, {{0, 1}}));
    CHECK(ah == Bits{1, 0});
    CHECK(bh == Bits{1, 1});
    auto [ah2, bh2] = reindex_hat({1}, {0}, Partition(2, {{0, 1}}));
    CHECK(ah2 == Bits{1, 1});
    CHECK(bh2 == Bits{0, 1});

    // sign preservation over all type-I partitions with n parts on up to 8 points
    for (int n = 1; n <= 4; ++n)
        for (int E = n; E <= 8; ++E)
            for (const auto& G : enumerate_type_one(E)) {
                if (G.num_parts() != n) continue;
                for (int am = 0; am < (1 << n); ++am)
                    for (int bm = 0; bm < (1 << n); ++bm) {
                        Bits a(n), b(n);
                        for (int k = 0; k < n; ++k) {
                            a[k] = am >> k & 1;
                            b[k] = bm >> k & 1;
                        }
                        auto [x, y] = reindex_hat(a, b, G);
                        CHECK(sign_xi(Partition::singletons(n), a, b) == sign_xi(G, x, y));
                    }
            }
    CHECK_THROWS(reindex_hat({1}, {1}, Partition(2, {{0}, {1}})));
}

TEST_CASE("noise matrix element reductions") {
    auto m = bath();
    auto e = noise_matrix_element(m, {}, {}, {}, {});
    CHECK(std::abs(e.integrate_simplex(1.0) - 1.0) < 1e-15);

    const auto g = LegProfile::coupling();
    auto one = noise_matrix_element(m, {{g, 0.0, 1.0}}, {1}, {0}, {});
    CHECK(std::abs(one.evaluate({0.4}) - k_inner(m, g, g)) < 1e-15);
    CHECK(one.evaluate({1.4}) == cplx(0.0));
    CHECK(std::abs(one.integrate_simplex(2.0) - k_inner(m, g, g)) < 1e-15);
    // unmatched external line
    CHECK(noise_matrix_element(m, {}, {1}, {0}, {}).terms.empty());
}

TEST_CASE("noise matrix element against a crossing-count pairing sum") {
    auto m = bath();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto gp = LegProfile::coupling();
    for (int trial = 0; trial < 30; ++trial) {
        const int km = 1 + trial % 3, kp = 1 + (trial / 3) % 3, n = 1 + trial % 4;
        std::vector<NoiseLeg> left, right;
        for (int j = 0; j < km; ++j) {
            const double S = 0.8 * U(rng);
            left.push_back({LegProfile::coupling(cplx(U(rng), U(rng))), S, S + 0.2 + U(rng)});
        }
        for (int j = 0; j < kp; ++j) {
            const double S = 0.8 * U(rng);
            right.push_back({LegProfile::coupling(cplx(U(rng), -U(rng))), S, S + 0.2 + U(rng)});
        }
        std::vector<double> s(n);
        for (auto& x : s) x = U(rng);
        std::sort(s.begin(), s.end());
        for (int am = 0; am < (1 << n); ++am)
            for (int bm = 0; bm < (1 << n); ++bm) {
                Bits a(n), b(n);
                for (int k = 0; k < n; ++k) {
                    a[k] = am >> k & 1;
                    b[k] = bm >> k & 1;
                }
                const cplx ours = noise_matrix_element(m, left, a, b, right).evaluate(s);

                // labels: left legs 0..km-1, right legs 100+, vertex creators 200+, vertex annihilators 300+
                std::vector<Op> ops;
                for (int j = km - 1; j >= 0; --j) ops.push_back({false, j});
                for (int i = n - 1; i >= 0; --i)
                    if (a[i]) ops.push_back({true, 200 + i});
                for (int i = n - 1; i >= 0; --i)
                    if (b[i]) ops.push_back({false, 300 + i});
                for (int j = kp - 1; j >= 0; --j) ops.push_back({true, 100 + j});
                auto contraction = [&](int an, int cr) -> cplx {
                    if (an < 100 && cr >= 100 && cr < 200) return limit_collective_inner(m, left[an], right[cr - 100]);
                    if (an < 100 && cr >= 200) return limit_h(m, left[an], s[cr - 200]);
                    if (an >= 300 && cr >= 100 && cr < 200) return std::conj(limit_h(m, right[cr - 100], s[an - 300]));
                    return 0.0;
                };
                const double word_sign = (sign_xi(Partition::singletons(n), a, b) & 1) ? -1.0 : 1.0;
                const cplx ref = word_sign * vacuum_pairing_sum(ops, contraction);
                CHECK(std::abs(ours - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
            }
    }
    (void)gp;
}

TEST_CASE("constrained simplex volume") {
    CHECK(std::abs(constrained_simplex_volume(2.0, {{-1, 5}, {-1, 5}, {-1, 5}}) - 8.0 / 6.0) < 1e-15);
    CHECK(std::abs(constrained_simplex_volume(1.0, {{0.0, 0.5}, {0.5, 1.0}}) - 0.25) < 1e-15);
    CHECK(constrained_simplex_volume(1.0, {{0.5, 1.0}, {0.0, 0.5}}) == 0.0);
    // Monte Carlo cross-check on a random window set
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::pair<double, double>> w{{0.1, 0.7}, {0.2, 0.9}, {0.0, 0.6}, {0.3, 1.0}};
    const int N = 400000;
    int hits = 0;
    for (int k = 0; k < N; ++k) {
        double s[4];
        for (double& x : s) x = U(rng);
        std::sort(s, s + 4);
        bool ok = true;
        for (int i = 0; i < 4; ++i) ok &= s[i] >= w[i].first && s[i] <= w[i].second;
        hits += ok;
    }
    const double mc = double(hits) / N / 24.0;
    CHECK(std::abs(constrained_simplex_volume(1.0, w) - mc) < 4.0 * std::sqrt(mc / 24.0 / N) + 1e-6);
}

TEST_CASE("vacuum limit matrix element is a semigroup") {
    std::mt19937_64 rng(31);
    auto m = bath();
    for (int trial = 0; trial < 5; ++trial) {
        auto sys = random_system(rng, 3, m.kappa(), 0.4);
        sys.E00 *= 0.5;
        sys.E01 *= 0.5;
        sys.E10 *= 0.5;
        const CVec p1 = random_vec(rng, 3), p2 = random_vec(rng, 3);
        auto c = build_limit_coefficients(sys);
        for (double t : {0.0, 0.5, 1.0, 2.0}) {
            auto r = qsde_matrix_element(sys, m, {}, {}, p1, p2, t);
            const cplx ref = p1.dot((c.L_ab(0, 0) * t).exp() * p2);
            INFO("t=" << t << " ref=" << std::abs(ref) << " orders=" << r.per_order.size());
            CHECK(std::abs(r.value - ref) <= 1e-8);
            CHECK(std::abs(r.value - ref) <= r.tail_bound + r.roundoff);
            CHECK(r.tail_bound < 1e-12);
        }
    }
}

TEST_CASE("limit matrix element at t = 0 is the leg gram") {
    std::mt19937_64 rng(5);
    auto m = bath();
    auto sys = random_system(rng, 2, m.kappa(), 0.3);
    const CVec p1 = random_vec(rng, 2), p2 = random_vec(rng, 2);
    const auto g = LegProfile::coupling();
    std::vector<NoiseLeg> L{{g, 0.0, 1.0}}, R{{g, 0.5, 1.5}};
    auto r = qsde_matrix_element(sys, m, L, R, p1, p2, 0.0);
    CHECK(std::abs(r.value - p1.dot(p2) * 0.5 * k_inner(m, g, g)) < 1e-14);
}

TEST_CASE("the two assembled forms of the limit series agree") {
    std::mt19937_64 rng(77);
    auto m = bath();
    const auto g = LegProfile::coupling();
    for (int trial = 0; trial < 4; ++trial) {
        auto sys = random_system(rng, 2, m.kappa(), 0.2);
        const CVec p1 = random_vec(rng, 2), p2 = random_vec(rng, 2);
        std::vector<NoiseLeg> L{{LegProfile::coupling(cplx(0.3, 1.0)), 0.1, 0.6}}, R{{g, 0.0, 0.5}, {g, 0.2, 0.9}};
        if (trial % 2) std::swap(L, R);
        QsdeOptions opt;
        opt.N_max = 3;
        auto a = qsde_matrix_element(sys, m, L, R, p1, p2, 0.8, opt);
        for (int n = 1; n <= 3; ++n) {
            const cplx b = qsde_order_hat_form(sys, m, L, R, p1, p2, 0.8, n, 22);
            CHECK(std::abs(a.per_order[n] - b) <= 1e-11 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST_CASE("order bounds dominate the limit series terms") {
    std::mt19937_64 rng(9);
    auto m = bath();
    const auto g = LegProfile::coupling();
    auto sys = random_system(rng, 2, m.kappa(), 0.4);
    const CVec p1 = random_vec(rng, 2), p2 = random_vec(rng, 2);
    std::vector<NoiseLeg> L{{g, 0.0, 1.0}}, R{{g, 0.2, 0.7}};
    QsdeOptions opt;
    opt.N_max = 6;
    auto r = qsde_matrix_element(sys, m, L, R, p1, p2, 1.0, opt);
    for (int n = 0; n <= 6; ++n) CHECK(std::abs(r.per_order[n]) <= qsde_order_bound(sys, m, L, R, p1, p2, 1.0, n));
    auto full = qsde_matrix_element(sys, m, L, R, p1, p2, 1.0);
    CHECK(std::abs(full.value - r.value) <= r.tail_bound);
}
