#include "darkspace/quadrature.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace darkspace {

namespace {

// Kronrod nodes on [0, 1] (symmetric), with the Gauss-7 weights at odd slots.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    ComplexMatrix kronrod;
    double error;
};

Panel gauss_kronrod(const MatrixFunction& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const ComplexMatrix fc = f(center);
    ComplexMatrix k15 = kKronrodWeights[7] * fc;
    ComplexMatrix g7 = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const ComplexMatrix sum = f(center - dx) + f(center + dx);
        k15 += kKronrodWeights[i] * sum;
        if (i % 2 == 1) g7 += kGaussWeights[i / 2] * sum;
    }
    k15 *= half;
    g7 *= half;
    return {k15, (k15 - g7).norm()};
}

ComplexMatrix adapt(const MatrixFunction& f, double a, double b, const Panel& whole,
                    double tol, int depth, const QuadratureOptions& options) {
    if (whole.error <= tol) return whole.kronrod;
    if (depth >= options.max_depth) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "integrate_matrix: no convergence on [" << a << ", " << b
            << "], error estimate " << whole.error;
        throw NumericalError(msg.str());
    }
    const double mid = 0.5 * (a + b);
    const Panel left = gauss_kronrod(f, a, mid);
    const Panel right = gauss_kronrod(f, mid, b);
    // Accept the refined pair if it jointly satisfies the tolerance.
    if (left.error + right.error <= tol) return left.kronrod + right.kronrod;
    return adapt(f, a, mid, left, 0.5 * tol, depth + 1, options) +
           adapt(f, mid, b, right, 0.5 * tol, depth + 1, options);
}

}  // namespace

ComplexMatrix integrate_matrix(const MatrixFunction& f, double a, double b,
                               const QuadratureOptions& options) {
    if (a == b) {
        const ComplexMatrix probe = f(a);
        return ComplexMatrix::Zero(probe.rows(), probe.cols());
    }
    const Panel whole = gauss_kronrod(f, a, b);
    const double tol = std::max(options.abs_tol, options.rel_tol * whole.kronrod.norm());
    return adapt(f, a, b, whole, tol, 0, options);
}

}  // namespace darkspace
