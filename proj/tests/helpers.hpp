#pragma once

#include <random>

#include "darkspace/lindblad.hpp"

namespace testing {

using darkspace::Complex;
using darkspace::ComplexMatrix;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const ComplexMatrix m = random_matrix(rng, n);
    return 0.5 * (m + m.adjoint());
}

inline darkspace::DensityMatrix random_state(std::mt19937_64& rng, Eigen::Index n) {
    const ComplexMatrix m = random_matrix(rng, n);
    ComplexMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    return darkspace::DensityMatrix(0.5 * (rho + rho.adjoint()));
}

// Truncated Taylor series with scaling and squaring, independent of the
// library exponential.
inline ComplexMatrix taylor_exp(const ComplexMatrix& a) {
    int squarings = 0;
    double norm = a.norm();
    while (norm > 0.25) {
        norm /= 2;
        ++squarings;
    }
    const ComplexMatrix x = a / std::pow(2.0, squarings);
    ComplexMatrix term = ComplexMatrix::Identity(a.rows(), a.cols());
    ComplexMatrix sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * x / double(k);
        sum += term;
    }
    for (int k = 0; k < squarings; ++k) sum = sum * sum;
    return sum;
}

inline ComplexMatrix basis_op(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

}  // namespace testing
