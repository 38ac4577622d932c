#include "darkspace/linalg.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace darkspace {

ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b + b * a;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double hermiticity_error(const ComplexMatrix& a) { return (a - a.adjoint()).norm(); }

bool all_finite(const ComplexMatrix& a) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const Complex z = a.data()[k];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

void require_square(const ComplexMatrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        std::ostringstream msg;
        msg << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
        throw ValidationError(msg.str());
    }
}

ComplexMatrix pauli(int axis) {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    switch (axis) {
        case 0:
            s(0, 1) = 1.0;
            s(1, 0) = 1.0;
            break;
        case 1:
            s(0, 1) = -kI;
            s(1, 0) = kI;
            break;
        case 2:
            s(0, 0) = 1.0;
            s(1, 1) = -1.0;
            break;
        default:
            throw ValidationError("pauli: axis must be 0, 1 or 2");
    }
    return s;
}

namespace {

ComplexMatrix exp_hermitian(const ComplexMatrix& h, Complex scale) {
    // e^{scale * h} for Hermitian h
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
    const Eigen::VectorXcd phases =
        (scale * es.eigenvalues().cast<Complex>().array()).exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
    require_square(a, "matrix_exp");
    if (a.rows() == 0) throw ValidationError("matrix_exp: dimension-zero input");
    if (!all_finite(a)) throw NumericalError("matrix_exp: non-finite input");

    const double scale = std::max(a.norm(), 1e-300);
    if (hermiticity_error(a) <= 1e-14 * scale) return exp_hermitian(a, 1.0);
    if ((a + a.adjoint()).norm() <= 1e-14 * scale) {
        // a = i K with K Hermitian
        return exp_hermitian(Complex(0.0, -1.0) * a, kI);
    }
    ComplexMatrix out = a.exp();
    if (!all_finite(out)) throw NumericalError("matrix_exp: overflow in scaling-and-squaring");
    return out;
}

ComplexMatrix kernel_basis(const ComplexMatrix& a, double rel_tol) {
    require_square(a, "kernel_basis");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw ValidationError("kernel_basis: rel_tol must lie in (0, 1)");
    }
    const Eigen::Index n = a.cols();
    if (n == 0) return ComplexMatrix(0, 0);
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * sv(0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (sv(k) <= cutoff) keep.push_back(k);
    }
    ComplexMatrix basis(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(keep[c]);
    }
    return basis;
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& a, double rel_tol) {
    require_square(a, "pseudo_inverse");
    const Eigen::Index n = a.rows();
    if (n == 0) return ComplexMatrix(0, 0);
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * sv(0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (sv(k) > cutoff) inv(k) = 1.0 / sv(k);
    }
    return svd.matrixV() * inv.cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
}

ComplexMatrix ordered_exponential(const MatrixFunction& generator, double s0, double s1,
                                  int steps) {
    if (steps < 1) throw ValidationError("ordered_exponential: steps must be >= 1");
    const double ds = (s1 - s0) / steps;
    // fourth-order Magnus step on the two Gauss-Legendre nodes
    const double offset = std::sqrt(3.0) / 6.0;
    auto sample = [&](double s) {
        ComplexMatrix g = generator(s);
        if (!all_finite(g)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "ordered_exponential: non-finite generator at phase " << s;
            throw NumericalError(msg.str());
        }
        return g;
    };
    ComplexMatrix result;
    for (int k = 0; k < steps; ++k) {
        const double mid = s0 + (k + 0.5) * ds;
        const ComplexMatrix a1 = sample(mid - offset * ds);
        const ComplexMatrix a2 = sample(mid + offset * ds);
        if (k == 0) result = ComplexMatrix::Identity(a1.rows(), a1.cols());
        const ComplexMatrix omega =
            (0.5 * ds) * (a1 + a2) + (std::sqrt(3.0) / 12.0 * ds * ds) * commutator(a2, a1);
        result = matrix_exp(omega) * result;
    }
    return result;
}

}  // namespace darkspace
