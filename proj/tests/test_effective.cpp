#include <doctest.h>

#include <cmath>
#include <numbers>

#include "darkspace/analysis.hpp"
#include "darkspace/effective.hpp"
#include "helpers.hpp"

using namespace darkspace;

namespace {

constexpr double kPi = std::numbers::pi;

EffectiveGenerator make_eff(const PathSpec& path, double gamma_t) {
    auto ds = dark_space(spin32_jump());
    REQUIRE(ds.has_value());
    return EffectiveGenerator(spin32_protocol(path, gamma_t), *ds);
}

PathSpec theta_loop() { return {AnglePath::linear(1), AnglePath::constant(0.0)}; }
PathSpec phi_loop(double theta) { return {AnglePath::constant(theta), AnglePath::linear(1)}; }

DensityMatrix plus_x() { return state_from_bloch({1.0, 0.0, 0.0}); }

}  // namespace

TEST_CASE("dark_space") {
    SUBCASE("amplitude damping") {
        const auto ds = dark_space(testing::basis_op(2, 1, 0));
        REQUIRE(ds.has_value());
        CHECK(ds->d == 1);
        CHECK(std::abs(ds->basis(0, 0)) < 1e-14);
        CHECK(std::abs(ds->basis(1, 0) - Complex(1.0)) < 1e-14);
    }
    SUBCASE("no dark states") { CHECK_FALSE(dark_space(ComplexMatrix::Identity(3, 3)).has_value()); }
    SUBCASE("spin-3/2 gauge is the computational basis") {
        const auto ds = dark_space(spin32_jump());
        REQUIRE(ds.has_value());
        CHECK(ds->d == 2);
        ComplexMatrix expected = ComplexMatrix::Zero(4, 2);
        expected(1, 0) = expected(2, 1) = 1.0;
        CHECK((ds->basis - expected).norm() < 1e-14);
        CHECK((ds->projector + ds->complement() - ComplexMatrix::Identity(4, 4)).norm() < 1e-14);
        std::mt19937_64 rng(1);
        const ComplexMatrix block = testing::random_matrix(rng, 2);
        CHECK((ds->compress(ds->embed(block)) - block).norm() < 1e-14);
    }
    SUBCASE("rotated jump keeps a deterministic basis") {
        std::mt19937_64 rng(3);
        const ComplexMatrix q =
            Eigen::HouseholderQR<ComplexMatrix>(testing::random_matrix(rng, 4)).householderQ();
        const ComplexMatrix l = q * spin32_jump() * q.adjoint();
        const auto a = dark_space(l);
        const auto b = dark_space(l);
        REQUIRE(a.has_value());
        CHECK((a->basis - b->basis).norm() == 0.0);
        CHECK((l * a->basis).norm() < 1e-10);
        CHECK((a->basis.adjoint() * a->basis - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
    }
}

TEST_CASE("projected Hamiltonian") {
    const auto ds = *dark_space(spin32_jump());
    SUBCASE("theta loop") {
        const auto eff = make_eff(theta_loop(), 100.0);
        for (double s : {0.0, 0.3, 0.9}) CHECK((eff.h0(s) + 2.0 * kPi * pauli(1)).norm() < 1e-10);
    }
    SUBCASE("phi loop at theta = 0") {
        const auto eff = make_eff(phi_loop(0.0), 100.0);
        CHECK((eff.h0(0.4) + kPi * pauli(2)).norm() < 1e-10);
    }
    SUBCASE("generic path against the closed form") {
        const PathSpec path{AnglePath::smoothstep(1, 0.3), AnglePath{AngleFamily::Fourier, 0.0, 1, {0.2}, {0.1}}};
        const auto eff = make_eff(path, 100.0);
        for (double s : {0.1, 0.5, 0.77}) {
            const double th = path.theta.value(s);
            const ComplexMatrix expected =
                -path.theta.derivative(s) * pauli(1) -
                path.phi.derivative(s) * (0.5 * std::cos(th) * pauli(2) - std::sin(th) * pauli(0));
            CHECK((eff.h0(s) - expected).norm() < 1e-9);
            CHECK((projected_hamiltonian(eff.hamiltonian(s), ds) - expected).norm() < 1e-9);
        }
    }
}

TEST_CASE("memory kernel and effective jump") {
    const auto eff = make_eff(theta_loop(), 200.0);
    CHECK(eff.x_tau_integral(0.0).norm() == 0.0);
    SUBCASE("theta loop closed form") {
        for (double tau : {0.3, 1.0, 4.0, 12.0}) {
            const ComplexMatrix expected = kI * 2.0 * kPi * (1.0 - std::exp(-1.5 * tau)) * pauli(2);
            CHECK((eff.ell(tau) - expected).norm() < 1e-8);
            CHECK((effective_jump(eff, tau) - expected).norm() < 1e-8);
        }
        CHECK((eff.ell(30.0, MemorySource::Adiabatic) - 2.0 * kPi * kI * pauli(2)).norm() < 1e-10);
    }
    SUBCASE("memory kernel solves its ODE") {
        for (double tau : {0.0, 0.5, 3.0, 150.0, 200.0}) CHECK(eff.c_tau_residual(tau) < 1e-7);
        const ComplexMatrix c = eff.c_tau(5.0);
        CHECK((c - c.adjoint()).norm() < 1e-14);
    }
    SUBCASE("integral kernel approaches the adiabatic one") {
        CHECK((eff.x_tau_integral(40.0) - eff.x_tau_adiabatic(40.0)).norm() < 1e-6);
    }
    SUBCASE("phi loop at theta = pi/2 gives a scalar jump") {
        // P_perp H P0 = 2 pi sqrt(3)/2 (|3/2><1/2| + |-3/2><-1/2|), (L^+L)^+ = 1/3 there
        const auto e2 = make_eff(phi_loop(kPi / 2), 100.0);
        const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
        CHECK((e2.ell(50.0, MemorySource::Adiabatic) - 2.0 * kPi * id).norm() < 1e-9);
        CHECK((e2.ell(50.0) - 2.0 * kPi * id).norm() < 1e-6);
    }
}

TEST_CASE("reduced right-hand side") {
    const auto eff = make_eff(theta_loop(), 50.0);
    const DensityMatrix rho = plus_x();
    const double eps = 1.0 / 50.0;
    const ComplexMatrix r = rho.matrix();
    // H0 = -2 pi sigma_y, ell = 2 pi i sigma_z
    const ComplexMatrix expected = -kI * eps * (-2.0 * kPi) * (pauli(1) * r - r * pauli(1)) +
                                   eps * eps * 4.0 * kPi * kPi * (pauli(2) * r * pauli(2) - r);
    CHECK((eff.rhs(r, 25.0, MemorySource::Adiabatic) - expected).norm() < 1e-10);
    const ComplexMatrix first = eff.rhs(r, 25.0, MemorySource::Adiabatic, EffectiveOrder::First);
    CHECK((first - (-kI * eps * (-2.0 * kPi)) * (pauli(1) * r - r * pauli(1))).norm() < 1e-10);
    CHECK_THROWS_AS(eff.rhs(ComplexMatrix::Identity(4, 4) / 4.0, 1.0), ValidationError);
}

TEST_CASE("holonomy") {
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    const auto eff = make_eff(theta_loop(), 100.0);
    CHECK((eff.holonomy(100.0) - id).norm() < 1e-10);
    CHECK((eff.holonomy(0.0) - id).norm() == 0.0);
    // quarter turn: exp(i (pi/2) sigma_y)
    CHECK((eff.holonomy(25.0) - kI * pauli(1)).norm() < 1e-10);
    // exp(i pi sigma_z) = -1
    CHECK((berry_holonomy(make_eff(phi_loop(0.0), 100.0), 100.0) + id).norm() < 1e-10);
}

TEST_CASE("evolve_effective") {
    const auto eff = make_eff(theta_loop(), 100.0);
    EffectiveEvolveOptions first;
    first.order = EffectiveOrder::First;
    const auto t1 = evolve_effective(plus_x(), eff, first);
    // unitary only: V = 1 returns the initial state
    CHECK(trace_distance(t1.final_state().matrix(), plus_x().matrix()) < 1e-8);
    const auto t2 = evolve_effective(plus_x(), eff);
    CHECK(purity(t2.final_state()) < 1.0 - 1e-3);
    CHECK(t2.invariants.max_trace_error < 1e-9);
    CHECK(t2.invariants.min_eigenvalue > -1e-8);
}

TEST_CASE("end-of-cycle state") {
    SUBCASE("constant protocol leaves the state alone") {
        const auto eff = make_eff({AnglePath::constant(0.3), AnglePath::constant(0.2)}, 20.0);
        for (auto route : {CycleRoute::ClosedForm, CycleRoute::Direct}) {
            const DensityMatrix f = end_of_cycle_state(plus_x(), eff, route);
            CHECK(trace_distance(f.matrix(), plus_x().matrix()) < 1e-10);
        }
    }
    SUBCASE("the two routes agree to second order") {
        // measured C = td * gammaT^2 is about 343 at gammaT = 100 and 366 at 200
        constexpr double kRouteC = 800.0;
        double prev = 0.0;
        for (double gt : {100.0, 200.0}) {
            const auto eff = make_eff(theta_loop(), gt);
            const DensityMatrix a = end_of_cycle_state(plus_x(), eff, CycleRoute::ClosedForm);
            const DensityMatrix b = end_of_cycle_state(plus_x(), eff, CycleRoute::Direct);
            const double td = trace_distance(a.matrix(), b.matrix());
            CHECK(td * gt * gt <= kRouteC);
            if (prev > 0.0) CHECK(td / prev <= 0.35);
            prev = td;
        }
    }
    SUBCASE("full-dimension variant rejects leakage") {
        const auto eff = make_eff(theta_loop(), 100.0);
        CHECK_THROWS_AS(end_of_cycle_state_full(DensityMatrix(testing::basis_op(4, 0, 0)), eff),
                        ValidationError);
    }
}

TEST_CASE("cycle grid") {
    const auto eff = make_eff(theta_loop(), 100.0);
    const CycleGrid grid = CycleGrid::build(eff);
    REQUIRE(grid.tau.size() % 2 == 1);
    CHECK(grid.tau.size() - 1 >= 2000);
    double total = 0.0;
    for (std::size_t k = 0; k < grid.tau.size(); ++k) total += grid.weight(k);
    CHECK(total == doctest::Approx(100.0).epsilon(1e-12));
    CHECK((grid.holonomy.back() - ComplexMatrix::Identity(2, 2)).norm() < 1e-8);
}

TEST_CASE("reconstruct_full_state") {
    const auto eff = make_eff(theta_loop(), 100.0);
    const DensityMatrix rho = plus_x();
    const auto zeroth = reconstruct_full_state(rho, eff, 50.0, 0);
    CHECK((zeroth.state.matrix() - eff.dark().embed(rho.matrix())).norm() < 1e-14);
    CHECK(zeroth.trace_renormalization < 1e-14);
    const auto full = reconstruct_full_state(rho, eff, 50.0);
    CHECK(std::abs(full.state.matrix().trace() - Complex(1.0)) < 1e-12);
    // against the exact rotating-frame state at the end of the cycle
    double prev = 0.0;
    for (double gt : {100.0, 200.0}) {
        const auto e = make_eff(theta_loop(), gt);
        const auto exact = exact_rotating_cycle(e.protocol(), e.dark(), rho);
        const auto rho_eff = evolve_effective(rho, e).final_state();
        const auto rec = reconstruct_full_state(rho_eff, e, gt);
        const double td = trace_distance(rec.state.matrix(), exact.final_state().matrix());
        MESSAGE("gammaT=" << gt << " reconstruction distance " << td);
        if (prev > 0.0) CHECK(td / prev <= 0.35);
        prev = td;
    }
}
