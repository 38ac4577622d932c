#include <doctest.h>

#include <cmath>
#include <numbers>

#include "darkspace/effective.hpp"
#include "darkspace/protocols.hpp"
#include "helpers.hpp"

using namespace darkspace;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PathSpec theta_loop() { return {AnglePath::linear(1), AnglePath::constant(0.0)}; }

}  // namespace

TEST_CASE("spin algebra") {
    for (int two_j : {1, 2, 3, 4}) {
        const SpinOperators s = spin_operators(two_j);
        const double j = two_j / 2.0;
        const Eigen::Index n = two_j + 1;
        CHECK(s.x.rows() == n);
        CHECK((commutator(s.x, s.y) - kI * s.z).norm() < 1e-12);
        CHECK((commutator(s.y, s.z) - kI * s.x).norm() < 1e-12);
        CHECK((commutator(s.z, s.x) - kI * s.y).norm() < 1e-12);
        const ComplexMatrix casimir = s.x * s.x + s.y * s.y + s.z * s.z;
        CHECK((casimir - j * (j + 1) * ComplexMatrix::Identity(n, n)).norm() < 1e-12);
        CHECK(s.z(0, 0).real() == doctest::Approx(j));
    }
    CHECK_THROWS_AS(spin_operators(0), ValidationError);
}

TEST_CASE("spin-3/2 jump") {
    const SpinOperators s = spin_operators(3);
    const ComplexMatrix expected =
        s.x * (s.z * s.z - 0.25 * ComplexMatrix::Identity(4, 4));
    CHECK((spin32_jump() - expected).norm() < 1e-14);
}

TEST_CASE("angle paths") {
    AnglePath fourier{AngleFamily::Fourier, 0.3, 2, {0.4, -0.1}, {0.2}};
    const std::vector<AnglePath> paths = {AnglePath::constant(0.7), AnglePath::linear(1),
                                          AnglePath::smoothstep(-2, 0.1), fourier};
    for (const auto& a : paths) {
        CHECK(a.value(1.0) - a.value(0.0) == doctest::Approx(kTwoPi * a.winding));
        for (double s : {0.1, 0.37, 0.8}) {
            const double h = 1e-5;
            const double fd = (a.value(s + h) - a.value(s - h)) / (2 * h);
            CHECK(a.derivative(s) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
    CHECK(angle_family_from_string(to_string(AngleFamily::Smoothstep)) == AngleFamily::Smoothstep);
    CHECK_THROWS_AS(angle_family_from_string("spiral"), ValidationError);
}

TEST_CASE("PathSpec validation") {
    CHECK_NOTHROW(theta_loop().validate());
    PathSpec bad{AnglePath{AngleFamily::Constant, 0.0, 1, {}, {}}, AnglePath::constant(0.0)};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(spin32_protocol(bad, 100.0), ValidationError);
    CHECK_THROWS_AS(spin32_protocol(theta_loop(), -1.0), ValidationError);
}

TEST_CASE("lab_jump against an independent exponential") {
    const PathSpec path{AnglePath::smoothstep(1, 0.2), AnglePath::linear(1, 0.4)};
    const Protocol p = spin32_protocol(path, 50.0);
    const SpinOperators s = spin_operators(3);
    for (double t : {0.0, 0.3, 0.77}) {
        const ComplexMatrix u = testing::taylor_exp(kI * path.theta.value(t) * s.y) *
                                testing::taylor_exp(kI * path.phi.value(t) * s.z);
        CHECK((p.unitary(t) - u).norm() < 1e-10);
        CHECK((lab_jump(p, t) - u.adjoint() * spin32_jump() * u).norm() < 1e-10);
    }
}

TEST_CASE("rotating-frame Hamiltonian closed form") {
    const PathSpec path{AnglePath::smoothstep(1), AnglePath{AngleFamily::Fourier, 0.0, 1, {0.3}, {}}};
    const Protocol p = spin32_protocol(path, 100.0);
    const SpinOperators s = spin_operators(3);
    for (double t : {0.05, 0.5, 0.91}) {
        const double th = path.theta.value(t);
        const ComplexMatrix expected =
            -(path.theta.derivative(t) * s.y +
              (std::cos(th) * s.z - std::sin(th) * s.x) * path.phi.derivative(t));
        CHECK((adiabatic_hamiltonian(p, t) - expected).norm() < 1e-10);
    }
    const auto g = rotating_generator(p, 30.0);
    CHECK(g.hamiltonian_prefactor == doctest::Approx(1.0 / 100.0));
    REQUIRE(g.jumps.size() == 1);
    CHECK((g.jumps[0] - spin32_jump()).norm() == 0.0);
}

TEST_CASE("custom_protocol") {
    const SpinOperators s = spin_operators(3);
    SUBCASE("reproduces the spin-3/2 protocol") {
        const PathSpec path{AnglePath::linear(1), AnglePath::smoothstep(1)};
        const Protocol ref = spin32_protocol(path, 80.0);
        for (auto mode : {DerivativeMode::FiniteDifference, DerivativeMode::Analytic}) {
            const Protocol c = custom_protocol({s.y, s.z}, {path.theta, path.phi}, spin32_jump(), 80.0, mode);
            for (double t : {0.1, 0.45, 0.8}) {
                CHECK((c.unitary(t) - ref.unitary(t)).norm() < 1e-12);
                CHECK((adiabatic_hamiltonian(c, t) - adiabatic_hamiltonian(ref, t)).norm() < 1e-6);
            }
        }
    }
    SUBCASE("rejects non-cyclic paths") {
        ComplexMatrix g = ComplexMatrix::Zero(2, 2);
        g(1, 1) = 0.5;
        CHECK_THROWS_AS(custom_protocol({g}, {AnglePath::linear(1)}, testing::basis_op(2, 1, 0), 10.0),
                        ValidationError);
    }
    SUBCASE("rejects shape problems") {
        CHECK_THROWS_AS(custom_protocol({}, {}, spin32_jump(), 10.0), ValidationError);
        CHECK_THROWS_AS(custom_protocol({pauli(0)}, {AnglePath::linear(1)}, spin32_jump(), 10.0),
                        ValidationError);
        ComplexMatrix nonherm = testing::basis_op(4, 0, 1);
        CHECK_THROWS_AS(custom_protocol({nonherm}, {AnglePath::linear(1)}, spin32_jump(), 10.0),
                        ValidationError);
    }
    SUBCASE("with_gamma_t keeps the path") {
        const Protocol p = spin32_protocol(theta_loop(), 10.0);
        const Protocol q = p.with_gamma_t(40.0);
        CHECK(q.gamma_t() == 40.0);
        CHECK((q.unitary(0.3) - p.unitary(0.3)).norm() == 0.0);
    }
}

TEST_CASE("lab_generator uses the rescaled phase") {
    const Protocol p = spin32_protocol(theta_loop(), 200.0);
    const auto g = lab_generator(p, 50.0);
    REQUIRE(g.jumps.size() == 1);
    CHECK((g.jumps[0] - lab_jump(p, 0.25)).norm() < 1e-14);
    CHECK_FALSE(g.hamiltonian.has_value());
}
