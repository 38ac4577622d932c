#include "darkspace/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace darkspace {

// ---------------------------------------------------------------- states

DensityMatrix::DensityMatrix(ComplexMatrix mat, const StateTolerances& tol)
    : mat_(std::move(mat)) {
    require_square(mat_, "DensityMatrix");
    if (mat_.rows() == 0) throw ValidationError("DensityMatrix: empty matrix");
    if (!all_finite(mat_)) throw ValidationError("DensityMatrix: non-finite entries");
    const double herm = hermiticity_error(mat_);
    if (herm > tol.hermiticity) {
        std::ostringstream msg;
        msg << "DensityMatrix: not Hermitian (||rho - rho^+|| = " << herm << ")";
        throw ValidationError(msg.str());
    }
    const double tr_err = std::abs(mat_.trace() - Complex(1.0));
    if (tr_err > tol.trace) {
        std::ostringstream msg;
        msg << "DensityMatrix: trace deviates from 1 by " << tr_err;
        throw ValidationError(msg.str());
    }
    const double lmin = min_eigenvalue(mat_);
    if (lmin < tol.min_eigenvalue) {
        std::ostringstream msg;
        msg << "DensityMatrix: negative eigenvalue " << lmin;
        throw ValidationError(msg.str());
    }
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix mat) {
    return DensityMatrix(std::move(mat), NoCheck{});
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw ValidationError("DensityMatrix::pure: zero vector");
    const ComplexVector u = psi / n;
    return DensityMatrix(u * u.adjoint());
}

double min_eigenvalue(const ComplexMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (hermitian + hermitian.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError("trace_distance: shape mismatch");
    }
    const ComplexMatrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (diff + diff.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------- generator

Eigen::Index LindbladGenerator::dim() const {
    if (hamiltonian) return hamiltonian->rows();
    if (!jumps.empty()) return jumps.front().rows();
    return -1;
}

void LindbladGenerator::validate() const {
    const Eigen::Index n = dim();
    if (hamiltonian) {
        require_square(*hamiltonian, "LindbladGenerator hamiltonian");
        const double scale = std::max(1.0, hamiltonian->norm());
        if (hermiticity_error(*hamiltonian) > 1e-10 * scale) {
            throw ValidationError("LindbladGenerator: Hamiltonian is not Hermitian");
        }
    }
    for (const auto& l : jumps) {
        require_square(l, "LindbladGenerator jump");
        if (l.rows() != n) throw ValidationError("LindbladGenerator: jump dimension mismatch");
    }
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladGenerator& gen) {
    const Eigen::Index n = rho.rows();
    if (gen.dim() >= 0 && gen.dim() != n) {
        std::ostringstream msg;
        msg << "lindblad_rhs: state dimension " << n << " vs generator dimension " << gen.dim();
        throw ValidationError(msg.str());
    }
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    if (gen.hamiltonian) {
        out.noalias() += (-kI * gen.hamiltonian_prefactor) * commutator(*gen.hamiltonian, rho);
    }
    for (const auto& l : gen.jumps) {
        const ComplexMatrix ldl = l.adjoint() * l;
        out.noalias() += l * rho * l.adjoint();
        out.noalias() -= 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladGenerator& gen) {
    return lindblad_rhs(rho.matrix(), gen);
}

// ---------------------------------------------------------------- integration

ComplexVector vec(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
    if (v.size() != dim * dim) throw ValidationError("unvec: size mismatch");
    return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

Trajectory integrate(const GeneratorFunction& gen_of_t, const DensityMatrix& rho0, double t0,
                     double t1, const IntegrateOptions& options) {
    const Eigen::Index n = rho0.dim();
    Trajectory traj;

    auto rhs = [&](double t, const ComplexVector& y) -> ComplexVector {
        const ComplexMatrix rho = Eigen::Map<const ComplexMatrix>(y.data(), n, n);
        return vec(lindblad_rhs(rho, gen_of_t(t)));
    };

    const auto& tol = options.tolerances;
    auto check = [&](double t, const ComplexMatrix& rho, bool with_eigen) {
        const double tr_err = std::abs(rho.trace() - Complex(1.0));
        const double herm = hermiticity_error(rho);
        traj.invariants.max_trace_error = std::max(traj.invariants.max_trace_error, tr_err);
        traj.invariants.max_hermiticity_error =
            std::max(traj.invariants.max_hermiticity_error, herm);
        std::ostringstream msg;
        msg.precision(17);
        if (tr_err > options.abort_factor * tol.trace) {
            msg << "integrate: trace drift " << tr_err << " at tau = " << t;
            throw NumericalError(msg.str());
        }
        if (herm > options.abort_factor * tol.hermiticity) {
            msg << "integrate: Hermiticity loss " << herm << " at tau = " << t;
            throw NumericalError(msg.str());
        }
        if (with_eigen) {
            const double lmin = min_eigenvalue(rho);
            traj.invariants.min_eigenvalue = std::min(traj.invariants.min_eigenvalue, lmin);
            if (lmin < options.abort_factor * tol.min_eigenvalue) {
                msg << "integrate: positivity violated (eigenvalue " << lmin << ") at tau = " << t;
                throw NumericalError(msg.str());
            }
        }
    };

    check(t0, rho0.matrix(), true);
    auto observer = [&](double t, const ComplexVector& y) {
        check(t, Eigen::Map<const ComplexMatrix>(y.data(), n, n), false);
    };

    OdeOptions ode;
    ode.rtol = options.rtol;
    ode.atol = options.atol;
    ode.initial_step = options.initial_step;
    ode.max_step = options.max_step;
    ode.output_times = options.output_times;
    const OdeSolution sol = solve_ode(rhs, vec(rho0.matrix()), t0, t1, ode, observer);

    traj.step_stats = {sol.accepted, sol.rejected};
    traj.times = sol.times;
    traj.states.reserve(sol.states.size());
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        ComplexMatrix rho = unvec(sol.states[k], n);
        check(sol.times[k], rho, true);
        traj.states.push_back(DensityMatrix::unchecked(std::move(rho)));
    }
    return traj;
}

// ---------------------------------------------------------------- superoperators

ComplexMatrix vectorize(const LindbladGenerator& gen) {
    gen.validate();
    const Eigen::Index n = gen.dim();
    if (n < 0) return ComplexMatrix(0, 0);
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
    if (gen.hamiltonian) {
        const ComplexMatrix& h = *gen.hamiltonian;
        s += (-kI * gen.hamiltonian_prefactor) * (kron(id, h) - kron(h.transpose(), id));
    }
    for (const auto& l : gen.jumps) {
        const ComplexMatrix ldl = l.adjoint() * l;
        s += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
    }
    return s;
}

ComplexMatrix apply_superoperator(const ComplexMatrix& superop, const ComplexMatrix& rho) {
    const Eigen::Index n = rho.rows();
    if (superop.rows() != n * n || superop.cols() != n * n) {
        throw ValidationError("apply_superoperator: shape mismatch");
    }
    return unvec(superop * vec(rho), n);
}

GapResult spectral_gap(const ComplexMatrix& superop, double kernel_tol) {
    require_square(superop, "spectral_gap");
    GapResult result;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(superop, false);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_gap: eigensolver failed");
    result.eigenvalues = es.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < result.eigenvalues.size(); ++k) {
        const Complex lambda = result.eigenvalues(k);
        if (std::abs(lambda) > kernel_tol) gap = std::min(gap, -lambda.real());
    }
    if (std::isinf(gap)) {
        result.gap = 0.0;
        result.gapless = true;
    } else {
        result.gap = gap;
        result.gapless = gap < 1e-8;
    }
    return result;
}

ComplexMatrix asymptotic_channel(const ComplexMatrix& superop, double tol) {
    require_square(superop, "asymptotic_channel");
    const Eigen::Index m = superop.rows();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(superop, false);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Complex lambda = es.eigenvalues()(k);
        if (std::abs(lambda) > tol && lambda.real() > -tol) {
            std::ostringstream msg;
            msg << "asymptotic_channel: non-decaying mode with eigenvalue " << lambda
                << "; the long-time limit does not exist";
            throw ValidationError(msg.str());
        }
    }
    const double scale = std::max(1.0, superop.norm());
    const double rel = std::min(tol / scale, 0.5);
    // Absolute cut relative to max(1, ||S||) so that S = 0 has a full kernel.
    auto kernel = [&](const ComplexMatrix& a) -> ComplexMatrix {
        Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (svd.singularValues()(k) <= rel * scale) keep.push_back(k);
        }
        ComplexMatrix basis(m, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(keep[c]);
        }
        return basis;
    };
    const ComplexMatrix right = kernel(superop);
    const ComplexMatrix left = kernel(superop.adjoint());
    if (right.cols() != left.cols() || right.cols() == 0) {
        throw NumericalError("asymptotic_channel: left/right kernel dimensions disagree");
    }
    const ComplexMatrix overlap = left.adjoint() * right;
    Eigen::FullPivLU<ComplexMatrix> lu(overlap);
    if (!lu.isInvertible()) {
        throw NumericalError("asymptotic_channel: zero eigenvalue is not semisimple");
    }
    return right * lu.inverse() * left.adjoint();
}

ComplexMatrix choi_matrix(const ComplexMatrix& channel) {
    require_square(channel, "choi_matrix");
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(channel.rows()))));
    if (n * n != channel.rows()) throw ValidationError("choi_matrix: not a superoperator");
    ComplexMatrix choi = ComplexMatrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // column i + j n of R is vec(R(E_ij))
            const ComplexMatrix image = unvec(channel.col(i + j * n), n);
            choi.block(i * n, j * n, n, n) = image;
        }
    }
    return choi;
}

std::vector<ComplexMatrix> kraus_from_channel(const ComplexMatrix& channel,
                                              const KrausOptions& options) {
    const ComplexMatrix choi = choi_matrix(channel);
    const Eigen::Index n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(choi.rows()))));
    if (hermiticity_error(choi) > 1e-8 * std::max(1.0, choi.norm())) {
        throw NumericalError("kraus_from_channel: Choi matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (choi + choi.adjoint()));
    const auto& w = es.eigenvalues();
    if (w(0) < -options.cp_tolerance) {
        std::ostringstream msg;
        msg << "kraus_from_channel: channel is not completely positive (Choi eigenvalue "
            << w(0) << ")";
        throw NumericalError(msg.str());
    }
    std::vector<ComplexMatrix> kraus;
    for (Eigen::Index k = w.size() - 1; k >= 0; --k) {
        if (w(k) < options.discard_below) continue;
        // v[i n + a] = M(a, i): a column-major reshape
        const ComplexVector v = es.eigenvectors().col(k);
        kraus.push_back(std::sqrt(w(k)) * Eigen::Map<const ComplexMatrix>(v.data(), n, n));
    }
    return kraus;
}

std::vector<ComplexMatrix> kraus_from_channel(const ComplexMatrix& channel,
                                              const ComplexMatrix& block_projector,
                                              const KrausOptions& options) {
    std::vector<ComplexMatrix> kraus = kraus_from_channel(channel, options);
    if (kraus.empty()) return kraus;
    const Eigen::Index n = kraus.front().rows();
    if (block_projector.rows() != n) {
        throw ValidationError("kraus_from_channel: projector dimension mismatch");
    }
    const auto count = static_cast<Eigen::Index>(kraus.size());
    ComplexMatrix blocks(n * n, count);
    for (Eigen::Index k = 0; k < count; ++k) {
        blocks.col(k) = vec(block_projector * kraus[static_cast<std::size_t>(k)] * block_projector);
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(blocks, Eigen::ComputeFullV);
    const ComplexMatrix& w = svd.matrixV();
    std::vector<ComplexMatrix> mixed;
    mixed.reserve(kraus.size());
    for (Eigen::Index j = 0; j < count; ++j) {
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        for (Eigen::Index k = 0; k < count; ++k) m += w(k, j) * kraus[static_cast<std::size_t>(k)];
        const Complex tr = (block_projector * m).trace();
        if (std::abs(tr) > 1e-12) m *= std::conj(tr) / std::abs(tr);
        mixed.push_back(std::move(m));
    }
    return mixed;
}

ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& kraus, const ComplexMatrix& rho) {
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& m : kraus) out.noalias() += m * rho * m.adjoint();
    return out;
}

}  // namespace darkspace
