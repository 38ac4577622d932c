#include <doctest.h>

#include <cmath>
#include <numbers>

#include "darkspace/linalg.hpp"
#include "darkspace/protocols.hpp"
#include "helpers.hpp"

using namespace darkspace;
using testing::random_hermitian;
using testing::random_matrix;

TEST_CASE("matrix_exp closed forms") {
    const ComplexMatrix id4 = ComplexMatrix::Identity(4, 4);
    CHECK((matrix_exp(ComplexMatrix::Zero(4, 4)) - id4).norm() < 1e-14);

    const ComplexMatrix minus_one = -ComplexMatrix::Identity(2, 2);
    CHECK((matrix_exp(kI * std::numbers::pi * pauli(1)) - minus_one).norm() < 1e-12);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = d(1, 1) = -3.0 * 0.5;
    const ComplexMatrix e = matrix_exp(d);
    CHECK(std::abs(e(0, 0) - std::exp(-1.5)) < 1e-14);
    CHECK(std::abs(e(1, 1) - std::exp(-1.5)) < 1e-14);
    CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("matrix_exp agrees with a Taylor oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix h = random_hermitian(rng, 4);
        for (const ComplexMatrix& a : {ComplexMatrix(h), ComplexMatrix(kI * h), random_matrix(rng, 4)}) {
            const ComplexMatrix ref = testing::taylor_exp(a);
            CHECK((matrix_exp(a) - ref).norm() <= 1e-10 * ref.norm());
        }
    }
}

TEST_CASE("matrix_exp inverse pair") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        ComplexMatrix a = random_matrix(rng, 4);
        a *= 10.0 / a.norm();
        const ComplexMatrix prod = matrix_exp(a) * matrix_exp(-a);
        CHECK((prod - ComplexMatrix::Identity(4, 4)).norm() < 1e-9);
    }
}

TEST_CASE("matrix_exp rejects bad input") {
    CHECK_THROWS_AS(matrix_exp(ComplexMatrix(0, 0)), ValidationError);
    CHECK_THROWS_AS(matrix_exp(ComplexMatrix::Zero(2, 3)), ValidationError);
    ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(matrix_exp(bad), NumericalError);
}

TEST_CASE("kernel_basis") {
    SUBCASE("diag(0, 1)") {
        ComplexMatrix a = ComplexMatrix::Zero(2, 2);
        a(1, 1) = 1.0;
        const ComplexMatrix k = kernel_basis(a);
        REQUIRE(k.cols() == 1);
        CHECK(std::abs(std::abs(k(0, 0)) - 1.0) < 1e-14);
        CHECK(std::abs(k(1, 0)) < 1e-14);
    }
    SUBCASE("spin-3/2 jump") {
        const ComplexMatrix l = spin32_jump();
        const ComplexMatrix k = kernel_basis(l);
        REQUIRE(k.cols() == 2);
        CHECK((k.adjoint() * k - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
        // the span is |+1/2>, |-1/2> (indices 1, 2)
        const ComplexMatrix p = k * k.adjoint();
        ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
        expected(1, 1) = expected(2, 2) = 1.0;
        CHECK((p - expected).norm() < 1e-12);
        const double smax = Eigen::JacobiSVD<ComplexMatrix>(l).singularValues()(0);
        for (Eigen::Index c = 0; c < k.cols(); ++c) CHECK((l * k.col(c)).norm() <= 10 * 1e-10 * smax);
    }
    SUBCASE("full rank") {
        std::mt19937_64 rng(3);
        CHECK(kernel_basis(random_matrix(rng, 4)).cols() == 0);
    }
    SUBCASE("tolerance range") {
        CHECK_THROWS_AS(kernel_basis(ComplexMatrix::Identity(2, 2), 0.0), ValidationError);
        CHECK_THROWS_AS(kernel_basis(ComplexMatrix::Identity(2, 2), 1.0), ValidationError);
    }
}

namespace {

void check_penrose(const ComplexMatrix& a, const ComplexMatrix& p) {
    CHECK((a * p * a - a).norm() < 1e-9);
    CHECK((p * a * p - p).norm() < 1e-9);
    CHECK(((a * p).adjoint() - a * p).norm() < 1e-9);
    CHECK(((p * a).adjoint() - p * a).norm() < 1e-9);
}

}  // namespace

TEST_CASE("pseudo_inverse") {
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = 0.5;
    CHECK((pseudo_inverse(d) - expected).norm() < 1e-15);
    check_penrose(d, pseudo_inverse(d));

    std::mt19937_64 rng(9);
    const ComplexMatrix v = Eigen::HouseholderQR<ComplexMatrix>(random_matrix(rng, 4)).householderQ();
    const ComplexMatrix proj = v.leftCols(2) * v.leftCols(2).adjoint();
    CHECK((pseudo_inverse(proj) - proj).norm() < 1e-12);

    const ComplexMatrix l = spin32_jump();
    const ComplexMatrix ldl = l.adjoint() * l;
    const ComplexMatrix pinv = pseudo_inverse(ldl);
    check_penrose(ldl, pinv);
    ComplexMatrix dark = ComplexMatrix::Zero(4, 4);
    dark(1, 1) = dark(2, 2) = 1.0;
    CHECK((pinv * dark).norm() < 1e-12);
    // L^+L = diag(3, 0, 0, 3) in this basis
    CHECK(std::abs(pinv(0, 0) - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(pinv(3, 3) - 1.0 / 3.0) < 1e-12);

    const ComplexMatrix rank2 = random_matrix(rng, 4).leftCols(2) * random_matrix(rng, 4).topRows(2);
    check_penrose(rank2, pseudo_inverse(rank2));
}

TEST_CASE("ordered_exponential") {
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    const double pi = std::numbers::pi;
    auto rotation = [&](double) -> ComplexMatrix { return -2.0 * pi * kI * pauli(1); };
    CHECK((ordered_exponential(rotation, 0.0, 1.0, 16) - id).norm() < 1e-12);
    CHECK((ordered_exponential([](double) -> ComplexMatrix { return ComplexMatrix::Zero(2, 2); },
                               0.0, 1.0, 8) - id).norm() == 0.0);

    SUBCASE("commuting generator has a closed form") {
        // G(s) = -i f(s) sigma_x with f = 1 + cos(2 pi s): integral 1
        auto g = [&](double s) -> ComplexMatrix { return -kI * (1.0 + std::cos(2 * pi * s)) * pauli(0); };
        const ComplexMatrix exact = testing::taylor_exp(-kI * pauli(0));
        CHECK((ordered_exponential(g, 0.0, 1.0, 64) - exact).norm() < 1e-10);
    }
    SUBCASE("unitary and convergent for a non-commuting generator") {
        auto g = [&](double s) -> ComplexMatrix {
            return -kI * (std::cos(3 * s) * pauli(0) + s * s * pauli(2) + 0.7 * pauli(1));
        };
        const ComplexMatrix v1 = ordered_exponential(g, 0.0, 2.0, 64);
        const ComplexMatrix v2 = ordered_exponential(g, 0.0, 2.0, 128);
        const ComplexMatrix v4 = ordered_exponential(g, 0.0, 2.0, 256);
        CHECK((v4.adjoint() * v4 - id).norm() < 1e-9);
        const double d1 = (v2 - v1).norm();
        const double d2 = (v4 - v2).norm();
        // at least second order in the step
        CHECK(d2 <= d1 / 4.0 * 1.05);
        CHECK(d1 <= 1.0 / (64.0 * 64.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ordered_exponential(rotation, 0.0, 1.0, 0), ValidationError);
        auto bad = [](double s) -> ComplexMatrix {
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            if (s > 0.5) m(0, 0) = std::numeric_limits<double>::infinity();
            return m;
        };
        CHECK_THROWS_WITH_AS(ordered_exponential(bad, 0.0, 1.0, 4), doctest::Contains("phase"),
                             NumericalError);
    }
}

TEST_CASE("helpers") {
    CHECK((commutator(pauli(0), pauli(1)) - 2.0 * kI * pauli(2)).norm() < 1e-15);
    CHECK((anticommutator(pauli(0), pauli(0)) - 2.0 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
    const ComplexMatrix k = kron(pauli(2), ComplexMatrix::Identity(2, 2));
    CHECK(k(0, 0) == Complex(1.0));
    CHECK(k(3, 3) == Complex(-1.0));
    CHECK_THROWS_AS(pauli(3), ValidationError);
}
