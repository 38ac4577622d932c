#pragma once

#include "darkspace/linalg.hpp"

namespace darkspace {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_depth = 40;
};

/// Adaptive Gauss-Kronrod (7/15) integral of a matrix-valued function over
/// [a, b]. The error estimate is the Frobenius norm of the K15 - G7 gap.
/// Throws NumericalError when the tolerance cannot be met within max_depth
/// bisections.
ComplexMatrix integrate_matrix(const MatrixFunction& f, double a, double b,
                               const QuadratureOptions& options = {});

}  // namespace darkspace
