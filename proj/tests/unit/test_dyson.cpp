#include "fermi/dyson.hpp"
#include "fermi/fock.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/KroneckerProduct>

using namespace fermi;
using namespace fermi::testing;

namespace {

ReservoirModel small_grid_bath() {
    return ReservoirModel(Lorentzian{1.0, 4.0, 0.3}, 0.0, GridSpec{6, 1.0}, KernelMode::FiniteModes);
}

DysonTermSpec random_spec(std::mt19937_64& rng, const ReservoirModel& bath, int d, int km, int kp, double e11) {
    DysonTermSpec s;
    s.bath = bath;
    CMat E11 = random_hermitian(rng, d);
    E11 *= e11 / op_norm(E11);
    s.sys = SystemModel::make(0.6 * random_hermitian(rng, d), 0.6 * random_mat(rng, d, d), E11, 0.0);
    s.phi1 = random_vec(rng, d);
    s.phi2 = random_vec(rng, d);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int j = 0; j < km; ++j) {
        const double S = 0.3 * U(rng);
        s.left.push_back({LegProfile::coupling(cplx(U(rng), U(rng) - 0.5)), S, S + 0.2 + 0.5 * U(rng)});
    }
    for (int j = 0; j < kp; ++j) {
        const double S = 0.3 * U(rng);
        s.right.push_back({LegProfile::coupling(cplx(U(rng), U(rng) - 0.5)), S, S + 0.2 + 0.5 * U(rng)});
    }
    return s;
}

/// <phi1 (x) left | Y_{s_n} ... Y_{s_1} | phi2 (x) right> on the dense system (x) Fock space.
cplx dense_product(const DysonTermSpec& spec, const std::vector<double>& s) {
    const ModeSpace space(spec.bath.num_modes());
    const auto x = spec.bath.mode_detunings();
    const CVec g = spec.bath.couplings();
    const double l2 = spec.lambda * spec.lambda;
    std::vector<CVec> lv, rv;
    for (const auto& l : spec.left) lv.push_back(collective_modes(spec.bath, l, spec.lambda));
    for (const auto& r : spec.right) rv.push_back(collective_modes(spec.bath, r, spec.lambda));
    CVec psi = Eigen::kroneckerProduct(spec.phi2, product_state(space, rv)).eval();
    const CVec bra = Eigen::kroneckerProduct(spec.phi1, reverse_product_state(space, lv)).eval();
    const CMat Id = CMat::Identity(space.dim(), space.dim());
    for (double si : s) {
        CVec gs(g.size());
        for (int k = 0; k < g.size(); ++k) gs[k] = g[k] * std::exp(I * x[k] * si / l2) / spec.lambda;
        const CMat ap = creation(space, gs).entries, am = annihilation(space, gs).entries;
        const CMat Y = Eigen::kroneckerProduct(spec.sys.E00, Id).eval() + Eigen::kroneckerProduct(spec.sys.E10, ap).eval() +
                       Eigen::kroneckerProduct(spec.sys.E01, am).eval() +
                       Eigen::kroneckerProduct(spec.sys.E11, (ap * am).eval()).eval();
        psi = Y * psi;
    }
    return bra.dot(psi);
}

}  // namespace

TEST_CASE("integrand equals the dense time-ordered product on a finite-mode bath") {
    std::mt19937_64 rng(2024);
    const auto bath = small_grid_bath();
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 24; ++trial) {
        auto spec = random_spec(rng, bath, 2, trial % 3, (trial / 3) % 3, 0.5);
        spec.n = 1 + trial % 4;
        spec.lambda = 0.5 + 0.3 * U(rng);
        spec.t = 1.0;
        std::vector<double> s(spec.n);
        for (auto& v : s) v = U(rng);
        std::sort(s.begin(), s.end());
        const cplx ours = dyson_integrand(spec, s), ref = dense_product(spec, s);
        INFO("trial " << trial << " n=" << spec.n << " km=" << spec.left.size() << " kp=" << spec.right.size());
        CHECK(std::abs(ours - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("low orders") {
    std::mt19937_64 rng(5);
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.0}, 0.0);
    auto spec = random_spec(rng, bath, 2, 1, 1, 0.3);
    spec.t = 0.7;
    spec.lambda = 0.5;
    spec.n = 0;
    const cplx g = collective_inner(bath, spec.left[0], spec.right[0], spec.lambda);
    CHECK(std::abs(dyson_term(spec).value - spec.phi1.dot(spec.phi2) * g) < 1e-14);

    spec.left.clear();
    spec.right.clear();
    spec.n = 1;
    const auto r = dyson_term(spec);
    CHECK(std::abs(r.value - spec.t * spec.phi1.dot(spec.sys.E00 * spec.phi2)) < 1e-12);

    // unmatched external lines vanish: E10 only, no legs
    spec.sys.E00.setZero();
    spec.sys.E11.setZero();
    CHECK(std::abs(dyson_term(spec).value) == 0.0);
    CHECK_THROWS_AS([&] { auto s = spec; s.n = 6; dyson_term(s); }(), GuardError);
}

TEST_CASE("order two with a single contraction") {
    // E10 = E01 = 1 on d = 1: D_2 = int_0^t ds2 int_0^s2 ds1 G_lambda(s2 - s1)
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.5}, 0.0);
    DysonTermSpec spec;
    spec.bath = bath;
    const CMat one = CMat::Constant(1, 1, 1.0), zero = CMat::Zero(1, 1);
    spec.sys = SystemModel::make(zero, one, zero, 0.0);
    spec.phi1 = spec.phi2 = CVec::Constant(1, 1.0);
    spec.n = 2;
    spec.t = 0.8;
    spec.lambda = 0.4;
    const double l2 = spec.lambda * spec.lambda;
    // int_0^t (t - u) G_lambda(u) du = lambda^2 H2(t / lambda^2)
    const cplx ref = l2 * bath.H2(spec.t / l2);
    CHECK(std::abs(dyson_term(spec).value - ref) < 1e-9);
}

TEST_CASE("Monte Carlo agrees with nested quadrature and is thread independent") {
    std::mt19937_64 rng(9);
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.2}, 0.0);
    auto spec = random_spec(rng, bath, 2, 1, 1, 0.4);
    spec.n = 3;
    spec.t = 0.6;
    spec.lambda = 0.5;
    const auto nested = dyson_term(spec);
    IntegratorOptions mc;
    mc.scheme = SimplexScheme::MonteCarlo;
    mc.samples = 60000;
    mc.threads = 1;
    const auto a = dyson_term(spec, mc);
    mc.threads = 4;
    const auto b = dyson_term(spec, mc);
    CHECK(a.value == b.value);
    CHECK(a.std_err == b.std_err);
    CHECK(std::abs(a.value - nested.value) <= 4.0 * a.std_err);
}

TEST_CASE("Monte Carlo standard errors cover the quadrature value") {
    std::mt19937_64 rng(10);
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.0}, 0.0);
    int covered = 0, trials = 0;
    for (int n = 1; n <= 3; ++n) {
        auto spec = random_spec(rng, bath, 2, 1, 0, 0.4);
        spec.n = n;
        spec.t = 0.5;
        spec.lambda = 0.5;
        const cplx exact = dyson_term(spec).value;
        IntegratorOptions mc;
        mc.scheme = SimplexScheme::MonteCarlo;
        mc.samples = 4000;
        mc.threads = 2;
        for (int k = 0; k < 40; ++k) {
            mc.seed = 1000 + 97 * k + n;
            const auto r = dyson_term(spec, mc);
            // complex estimate: the error radius is sqrt(2) times the per-component sigma
            covered += std::abs(r.value - exact) <= 2.0 * r.std_err;
            ++trials;
        }
    }
    MESSAGE("2-sigma coverage " << covered << "/" << trials);
    CHECK(covered >= 0.95 * trials);
}

TEST_CASE("chain integrals") {
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.7}, 0.0);
    // closed form against direct quadrature for n = 2, 3
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double t = 0.6, lam = 0.5, l2 = lam * lam;
    auto absG = [&](double u) { return std::abs(bath.g1(u / l2)) / l2; };
    const double i2 = GK::integrate([&](double s2) { return GK::integrate([&](double s1) { return absG(s2 - s1); }, 0.0, s2, 15, 1e-12); }, 0.0, t, 15, 1e-12);
    CHECK(std::abs(chain_integral(bath, Partition(2, {{0, 1}}), t, lam) - i2) < 1e-10);
    const double i3 = GK::integrate([&](double s3) {
        return GK::integrate([&](double s2) {
            return GK::integrate([&](double s1) { return absG(s3 - s1); }, 0.0, s2, 12, 1e-11);
        }, 0.0, s3, 12, 1e-11);
    }, 0.0, t, 12, 1e-11);
    CHECK(std::abs(chain_integral(bath, Partition(3, {{0, 2}, {1}}), t, lam) - i3) < 1e-9);
    CHECK(std::abs(chain_integral(bath, Partition::singletons(3), t, lam) - t * t * t / 6.0) < 1e-14);

    // the type-I control tends to the product of half-line integrals
    const double kb = bath.kbar();
    const double pair = chain_integral(bath, Partition(4, {{0, 1}, {2, 3}}), 1.0, 0.01);
    CHECK(std::abs(pair - kb * kb / 2.0) < 1e-3);
    const auto decay = type_two_decay(bath, Partition(4, {{0, 2}, {1, 3}}), 1.0, {0.5, 0.25, 0.125});
    CHECK(decay[1] < 0.5 * decay[0]);
    CHECK(decay[2] < 0.5 * decay[1]);
    CHECK_THROWS(type_two_decay(bath, Partition(4, {{0, 1}, {2, 3}}), 1.0, {0.5}));
}

TEST_CASE("truncation bounds") {
    std::mt19937_64 rng(44);
    const ReservoirModel bath(Lorentzian{1.0, 4.0, 0.0}, 0.0);
    auto spec = random_spec(rng, bath, 2, 0, 0, 0.4);
    spec.t = 0.5;
    spec.lambda = 0.5;
    const auto c = bound_constants(spec);
    CHECK(std::abs(truncation_bound(spec, 1) - c.phi_norms * 4.0 * c.C * spec.t) < 1e-13);

    for (int trial = 0; trial < 10; ++trial) {
        auto sp = random_spec(rng, bath, 2, trial % 2, (trial / 2) % 2, 0.5 / bath.kbar() * 0.9);
        sp.t = 0.5;
        sp.lambda = 0.4 + 0.05 * trial;
        for (int n = 0; n <= 3; ++n) {
            sp.n = n;
            CHECK(std::abs(dyson_term(sp).value) <= truncation_bound(sp, n));
        }
    }

    spec.n = 0;
    const auto sum = dyson_partial_sum(spec, 3);
    CHECK(sum.tail_bound > 0.0);
    CHECK(std::isfinite(sum.tail_bound));
    for (int n = 1; n <= 3; ++n) CHECK(std::abs(sum.per_order[n]) <= truncation_bound(spec, n));

    auto bad = spec;
    bad.sys.E11 *= 2.0 / (bath.kbar() * op_norm(bad.sys.E11));
    CHECK_THROWS_AS(truncation_bound(bad, 2), GuardError);
}
