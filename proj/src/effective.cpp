#include "darkspace/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace darkspace {

// ---------------------------------------------------------------- dark space

ComplexMatrix DarkSpace::complement() const {
    const Eigen::Index n = dim();
    return ComplexMatrix::Identity(n, n) - projector;
}

std::optional<DarkSpace> dark_space(const ComplexMatrix& l, double rel_tol) {
    require_square(l, "dark_space");
    const ComplexMatrix kernel = kernel_basis(l, rel_tol);
    const Eigen::Index d = kernel.cols();
    if (d == 0) return std::nullopt;
    const Eigen::Index n = l.rows();
    const ComplexMatrix proj = kernel * kernel.adjoint();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double oa = proj(a, a).real();
        const double ob = proj(b, b).real();
        if (std::abs(oa - ob) <= 1e-12) return false;
        return oa > ob;
    });

    ComplexMatrix basis(n, d);
    Eigen::Index found = 0;
    for (Eigen::Index idx : order) {
        if (found == d) break;
        ComplexVector v = proj.col(idx);
        for (Eigen::Index b = 0; b < found; ++b) {
            v -= basis.col(b) * (basis.col(b).adjoint() * v)(0);
        }
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        basis.col(found++) = v / norm;
    }
    if (found != d) throw NumericalError("dark_space: failed to build a gauge-fixed basis");

    // one round of re-orthogonalisation against roundoff
    Eigen::HouseholderQR<ComplexMatrix> qr(basis);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        const Complex overlap = (q.col(b).adjoint() * basis.col(b))(0);
        q.col(b) *= overlap / std::abs(overlap);
    }

    DarkSpace ds;
    ds.basis = q;
    ds.projector = q * q.adjoint();
    ds.d = d;
    const double annihilation = (l * ds.basis).norm();
    if (annihilation > 1e-10 * std::max(1.0, l.norm())) {
        std::ostringstream msg;
        msg << "dark_space: basis not annihilated by L (residual " << annihilation << ")";
        throw NumericalError(msg.str());
    }
    return ds;
}

// ---------------------------------------------------------------- Hamiltonians

ComplexMatrix adiabatic_hamiltonian(const Protocol& protocol, double s) {
    const ComplexMatrix u = protocol.unitary(s);
    const Eigen::Index n = u.rows();
    if ((u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm() > 1e-8) {
        std::ostringstream msg;
        msg << "adiabatic_hamiltonian: U(s) not unitary at s = " << s;
        throw ValidationError(msg.str());
    }
    const ComplexMatrix h = kI * protocol.unitary_derivative(s) * u.adjoint();
    if (hermiticity_error(h) > 1e-8 * std::max(1.0, h.norm())) {
        std::ostringstream msg;
        msg << "adiabatic_hamiltonian: H(s) not Hermitian at s = " << s;
        throw NumericalError(msg.str());
    }
    return 0.5 * (h + h.adjoint());
}

ComplexMatrix projected_hamiltonian(const ComplexMatrix& h, const DarkSpace& ds) {
    if (h.rows() != ds.dim()) throw ValidationError("projected_hamiltonian: dimension mismatch");
    return ds.compress(h);
}

// ---------------------------------------------------------------- EffectiveGenerator

EffectiveGenerator::EffectiveGenerator(Protocol protocol, DarkSpace ds)
    : protocol_(std::move(protocol)), ds_(std::move(ds)) {
    if (ds_.dim() != protocol_.dim()) {
        throw ValidationError("EffectiveGenerator: dark space and protocol dimensions differ");
    }
    const ComplexMatrix& l = protocol_.rotating_jump();
    p_perp_ = ds_.complement();
    ldl_ = l.adjoint() * l;
    ldl_pinv_ = pseudo_inverse(ldl_);

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (ldl_ + ldl_.adjoint()));
    const double cutoff = kDefaultRelTol * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Eigen::Index> bright;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        if (es.eigenvalues()(k) > cutoff) bright.push_back(k);
    }
    bright_modes_.resize(ds_.dim(), static_cast<Eigen::Index>(bright.size()));
    bright_rates_.resize(static_cast<Eigen::Index>(bright.size()));
    for (std::size_t c = 0; c < bright.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        bright_modes_.col(col) = es.eigenvectors().col(bright[c]);
        bright_rates_(col) = es.eigenvalues()(bright[c]);
    }
}

ComplexMatrix EffectiveGenerator::h0(double s) const {
    return projected_hamiltonian(hamiltonian(s), ds_);
}

ComplexMatrix EffectiveGenerator::x_tau_integral(double tau) const {
    const Eigen::Index n = ds_.dim();
    if (tau < 0.0 || tau > gamma_t() * (1.0 + 1e-12)) {
        throw ValidationError("x_tau_integral: tau outside [0, gammaT]");
    }
    if (bright_rates_.size() == 0 || tau == 0.0) return ComplexMatrix::Zero(n, n);

    const double gt = gamma_t();
    const ComplexMatrix modes_dag = bright_modes_.adjoint();
    // Integrand in mode space: e^{rate (s'-tau)/2} <k| H(s'/gammaT) |m>.
    auto integrand = [&](double sp) -> ComplexMatrix {
        const Eigen::ArrayXd decay = (0.5 * bright_rates_.array() * (sp - tau)).exp();
        const ComplexMatrix coupling = modes_dag * hamiltonian(sp / gt) * ds_.basis;
        return decay.cast<Complex>().matrix().asDiagonal() * coupling;
    };
    // Beyond this window the kernel is below 1e-17 of its peak.
    const double window = 2.0 * 39.2 / bright_rates_.minCoeff();
    const double lo = std::max(0.0, tau - window);
    const ComplexMatrix modal = integrate_matrix(integrand, lo, tau, quadrature);
    return p_perp_ * bright_modes_ * modal * ds_.basis.adjoint();
}

ComplexMatrix EffectiveGenerator::x_tau_adiabatic(double tau) const {
    const ComplexMatrix h = hamiltonian(tau / gamma_t());
    return 2.0 * ldl_pinv_ * p_perp_ * h * ds_.projector;
}

ComplexMatrix EffectiveGenerator::x_tau(double tau, MemorySource source) const {
    return source == MemorySource::Integral ? x_tau_integral(tau) : x_tau_adiabatic(tau);
}

ComplexMatrix EffectiveGenerator::c_tau(double tau, MemorySource source) const {
    const ComplexMatrix x = x_tau(tau, source);
    return x + x.adjoint();
}

ComplexMatrix EffectiveGenerator::ell(double tau, MemorySource source) const {
    return ds_.compress(protocol_.rotating_jump() * x_tau(tau, source));
}

std::vector<ComplexMatrix> EffectiveGenerator::ell_kraus(double tau,
                                                         const std::vector<ComplexMatrix>& kraus,
                                                         MemorySource source) const {
    const ComplexMatrix lc = protocol_.rotating_jump() * c_tau(tau, source);
    std::vector<ComplexMatrix> out;
    out.reserve(kraus.size());
    for (const auto& m : kraus) out.push_back(ds_.compress(m * lc));
    return out;
}

double EffectiveGenerator::c_tau_residual(double tau, double h) const {
    ComplexMatrix dx;
    if (tau - 2.0 * h >= 0.0 && tau + 2.0 * h <= gamma_t()) {
        dx = (-x_tau_integral(tau + 2 * h) + 8.0 * x_tau_integral(tau + h) -
              8.0 * x_tau_integral(tau - h) + x_tau_integral(tau - 2 * h)) /
             (12.0 * h);
    } else if (tau + 4.0 * h <= gamma_t()) {
        dx = (-25.0 * x_tau_integral(tau) + 48.0 * x_tau_integral(tau + h) -
              36.0 * x_tau_integral(tau + 2 * h) + 16.0 * x_tau_integral(tau + 3 * h) -
              3.0 * x_tau_integral(tau + 4 * h)) /
             (12.0 * h);
    } else {
        dx = (25.0 * x_tau_integral(tau) - 48.0 * x_tau_integral(tau - h) +
              36.0 * x_tau_integral(tau - 2 * h) - 16.0 * x_tau_integral(tau - 3 * h) +
              3.0 * x_tau_integral(tau - 4 * h)) /
             (12.0 * h);
    }
    const ComplexMatrix source = p_perp_ * hamiltonian(tau / gamma_t()) * ds_.projector;
    return (dx + 0.5 * ldl_ * x_tau_integral(tau) - source).norm();
}

namespace {

ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
    const ComplexMatrix ldl = l.adjoint() * l;
    return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

}  // namespace

ComplexMatrix EffectiveGenerator::rhs(const ComplexMatrix& rho0, double tau, MemorySource source,
                                      EffectiveOrder order) const {
    if (rho0.rows() != ds_.d) throw ValidationError("effective rhs: state is not d x d");
    const double eps = 1.0 / gamma_t();
    ComplexMatrix out = (-kI * eps) * commutator(h0(tau * eps), rho0);
    if (order == EffectiveOrder::Second) out += eps * eps * dissipator(ell(tau, source), rho0);
    return out;
}

ComplexMatrix EffectiveGenerator::holonomy(double tau, int steps) const {
    const double s1 = tau / gamma_t();
    if (s1 == 0.0) return ComplexMatrix::Identity(ds_.d, ds_.d);
    return ordered_exponential([this](double s) -> ComplexMatrix { return -kI * h0(s); }, 0.0, s1,
                               steps);
}

ComplexMatrix x_tau_integral(const EffectiveGenerator& eff, double tau) {
    return eff.x_tau_integral(tau);
}

ComplexMatrix x_tau_adiabatic(const EffectiveGenerator& eff, double tau) {
    return eff.x_tau_adiabatic(tau);
}

ComplexMatrix effective_jump(const EffectiveGenerator& eff, double tau, MemorySource source) {
    return eff.ell(tau, source);
}

ComplexMatrix effective_rhs(const DensityMatrix& rho0, const EffectiveGenerator& eff, double tau,
                            MemorySource source) {
    return eff.rhs(rho0.matrix(), tau, source);
}

ComplexMatrix berry_holonomy(const EffectiveGenerator& eff, double tau, int steps) {
    return eff.holonomy(tau, steps);
}

// ---------------------------------------------------------------- evolution

Trajectory evolve_effective(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                            const EffectiveEvolveOptions& options) {
    const DarkSpace& ds = eff.dark();
    const Eigen::Index d = ds.d;
    const Eigen::Index n = ds.dim();
    if (rho_init.dim() != d) throw ValidationError("evolve_effective: state is not d x d");
    const double gt = eff.gamma_t();
    const double eps = 1.0 / gt;
    const ComplexMatrix& l = eff.protocol().rotating_jump();
    const ComplexMatrix p_perp = ds.complement();
    const ComplexMatrix ldl = eff.ldl();
    const bool second = options.order == EffectiveOrder::Second;

    // y = [vec(rho) (d*d) ; vec(Y) (n*d)], Y = X basis.
    const Eigen::Index nrho = d * d;
    auto rhs = [&](double tau, const ComplexVector& y) -> ComplexVector {
        const Eigen::Map<const ComplexMatrix> rho(y.data(), d, d);
        const Eigen::Map<const ComplexMatrix> ymat(y.data() + nrho, n, d);
        const ComplexMatrix h = eff.hamiltonian(tau * eps);
        ComplexVector out(y.size());
        Eigen::Map<ComplexMatrix> drho(out.data(), d, d);
        Eigen::Map<ComplexMatrix> dy(out.data() + nrho, n, d);
        const ComplexMatrix h0 = ds.compress(h);
        drho = (-kI * eps) * (h0 * rho - rho * h0);
        if (second) {
            const ComplexMatrix ell = ds.basis.adjoint() * l * ymat;
            drho += eps * eps * dissipator(ell, rho);
        }
        dy = p_perp * h * ds.basis - 0.5 * ldl * ymat;
        return out;
    };

    ComplexVector y0 = ComplexVector::Zero(nrho + n * d);
    y0.head(nrho) = vec(rho_init.matrix());

    OdeOptions ode;
    ode.rtol = options.rtol;
    ode.atol = options.atol;
    ode.max_step = options.max_step;
    ode.output_times = options.output_times;
    double t_end = gt;
    if (!ode.output_times.empty()) {
        t_end = *std::max_element(ode.output_times.begin(), ode.output_times.end());
    } else {
        ode.output_times = {gt};
    }
    Trajectory traj;
    if (t_end <= 0.0) {
        traj.times = {0.0};
        traj.states = {rho_init};
        return traj;
    }
    const OdeSolution sol = solve_ode(rhs, y0, 0.0, t_end, ode);
    traj.step_stats = {sol.accepted, sol.rejected};
    traj.times = sol.times;
    for (const auto& y : sol.states) {
        ComplexMatrix rho = Eigen::Map<const ComplexMatrix>(y.data(), d, d);
        traj.invariants.max_trace_error =
            std::max(traj.invariants.max_trace_error, std::abs(rho.trace() - Complex(1.0)));
        traj.invariants.max_hermiticity_error =
            std::max(traj.invariants.max_hermiticity_error, hermiticity_error(rho));
        traj.invariants.min_eigenvalue = std::min(traj.invariants.min_eigenvalue, min_eigenvalue(rho));
        traj.states.push_back(DensityMatrix::unchecked(std::move(rho)));
    }
    return traj;
}

CycleGrid CycleGrid::build(const EffectiveGenerator& eff, const CycleGridOptions& options) {
    const double gt = eff.gamma_t();
    int panels = std::max(options.min_panels, static_cast<int>(std::ceil(options.panels_per_tau * gt)));
    if (panels % 2 == 1) ++panels;
    const double h = gt / panels;
    const Eigen::Index d = eff.dark().d;

    CycleGrid grid;
    grid.tau.reserve(static_cast<std::size_t>(panels) + 1);
    ComplexMatrix v = ComplexMatrix::Identity(d, d);
    for (int k = 0; k <= panels; ++k) {
        const double tau = k * h;
        if (k > 0) {
            const double mid = (k - 0.5) * h / gt;
            v = matrix_exp((-kI * (h / gt)) * eff.h0(mid)) * v;
        }
        grid.tau.push_back(tau);
        grid.holonomy.push_back(v);
        grid.ell.push_back(eff.ell(tau, MemorySource::Integral));
    }
    return grid;
}

double CycleGrid::weight(std::size_t k) const {
    const std::size_t last = tau.size() - 1;
    const double h = tau[1] - tau[0];
    if (k == 0 || k == last) return h / 3.0;
    return (k % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
}

DensityMatrix end_of_cycle_state(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                                 CycleRoute route, const CycleGridOptions& grid_options) {
    const Eigen::Index d = eff.dark().d;
    if (rho_init.dim() != d) throw ValidationError("end_of_cycle_state: state is not d x d");
    const StateTolerances loose{1e-8, 1e-8, -1.0};
    if (route == CycleRoute::Direct) {
        const Trajectory traj = evolve_effective(rho_init, eff);
        return DensityMatrix(traj.final_state().matrix(), loose);
    }
    const CycleGrid grid = CycleGrid::build(eff, grid_options);
    const ComplexMatrix& rho = rho_init.matrix();
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < grid.tau.size(); ++k) {
        const ComplexMatrix& v = grid.holonomy[k];
        const ComplexMatrix lk = v.adjoint() * grid.ell[k] * v;
        acc += grid.weight(k) * dissipator(lk, rho);
    }
    const double eps = 1.0 / eff.gamma_t();
    const ComplexMatrix& vt = grid.holonomy.back();
    ComplexMatrix out = vt * (rho + eps * eps * acc) * vt.adjoint();
    out = 0.5 * (out + out.adjoint());
    return DensityMatrix(std::move(out), loose);
}

DensityMatrix end_of_cycle_state_full(const DensityMatrix& rho_full, const EffectiveGenerator& eff,
                                      CycleRoute route) {
    const DarkSpace& ds = eff.dark();
    if (rho_full.dim() != ds.dim()) throw ValidationError("end_of_cycle_state: dimension mismatch");
    const ComplexMatrix& rho = rho_full.matrix();
    const double leak = (rho - ds.projector * rho * ds.projector).norm();
    if (leak > 1e-10) {
        std::ostringstream msg;
        msg << "end_of_cycle_state: initial state leaks out of the dark space by " << leak;
        throw ValidationError(msg.str());
    }
    return end_of_cycle_state(DensityMatrix(ds.compress(rho)), eff, route);
}

Reconstruction reconstruct_full_state(const DensityMatrix& rho_ins, const EffectiveGenerator& eff,
                                      double tau, int max_order) {
    const DarkSpace& ds = eff.dark();
    if (rho_ins.dim() != ds.d) throw ValidationError("reconstruct_full_state: state is not d x d");
    const double eps = 1.0 / eff.gamma_t();
    const ComplexMatrix e = ds.embed(rho_ins.matrix());
    ComplexMatrix k = e;
    if (max_order >= 1 && eps > 0.0) {
        const ComplexMatrix c = eff.c_tau(tau);
        k += (-kI * eps) * commutator(c, e);
        if (max_order >= 2) {
            const ComplexMatrix c2 = c * c;
            k += eps * eps * (c * e * c - 0.5 * anticommutator(c2, e));
        }
    }
    const Complex tr = k.trace();
    Reconstruction out{DensityMatrix::unchecked(ComplexMatrix()), std::abs(tr - Complex(1.0))};
    k /= tr;
    out.state = DensityMatrix(0.5 * (k + k.adjoint()), StateTolerances{1e-8, 1e-10, -1.0});
    return out;
}

}  // namespace darkspace
