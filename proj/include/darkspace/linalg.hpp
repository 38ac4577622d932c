#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace darkspace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: wrong shapes, invalid states, non-cyclic paths.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A computation that could not reach its accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline constexpr double kDefaultRelTol = 1e-10;

// Small helpers used everywhere.
ComplexMatrix dagger(const ComplexMatrix& a);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
double hermiticity_error(const ComplexMatrix& a);
bool all_finite(const ComplexMatrix& a);
void require_square(const ComplexMatrix& a, const char* what);

/// Pauli matrices in the order x, y, z.
ComplexMatrix pauli(int axis);

/// e^A. Hermitian and anti-Hermitian inputs go through an eigendecomposition;
/// everything else through scaling-and-squaring.
ComplexMatrix matrix_exp(const ComplexMatrix& a);

/// Orthonormal basis (as columns) of the right null space of `a`: right
/// singular vectors with singular value <= rel_tol * sigma_max. The result has
/// zero columns when the kernel is trivial.
ComplexMatrix kernel_basis(const ComplexMatrix& a, double rel_tol = kDefaultRelTol);

/// Moore-Penrose pseudoinverse; singular values <= rel_tol * sigma_max are
/// treated as exact zeros.
ComplexMatrix pseudo_inverse(const ComplexMatrix& a, double rel_tol = kDefaultRelTol);

using MatrixFunction = std::function<ComplexMatrix(double)>;

/// Time-ordered exponential of a phase-dependent generator over [s0, s1]
/// with `steps` fourth-order Magnus steps. Later phases multiply from the left.
ComplexMatrix ordered_exponential(const MatrixFunction& generator, double s0, double s1,
                                  int steps);

}  // namespace darkspace
