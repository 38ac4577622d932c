#pragma once

#include <optional>
#include <vector>

#include "darkspace/lindblad.hpp"
#include "darkspace/protocols.hpp"
#include "darkspace/quadrature.hpp"

namespace darkspace {

/// Orthonormal dark basis (columns), its projector and dimension.
struct DarkSpace {
    ComplexMatrix basis;      ///< n x d
    ComplexMatrix projector;  ///< P0 = basis basis^+
    Eigen::Index d = 0;

    Eigen::Index dim() const { return basis.rows(); }
    ComplexMatrix complement() const;
    /// n x d -> d x d block in the dark basis.
    ComplexMatrix compress(const ComplexMatrix& op) const { return basis.adjoint() * op * basis; }
    /// d x d -> n x n operator supported on the dark space.
    ComplexMatrix embed(const ComplexMatrix& block) const { return basis * block * basis.adjoint(); }
};

/// Kernel of L with a deterministic gauge: candidates are the projected
/// computational basis vectors, taken in order of descending overlap (ties by
/// index), Gram-Schmidt orthonormalised, phase fixed by a positive overlap.
/// Empty kernel returns nullopt.
std::optional<DarkSpace> dark_space(const ComplexMatrix& l, double rel_tol = kDefaultRelTol);

/// H(s) = i (dU/ds) U^+(s), the rotating-frame Hamiltonian in phase units.
ComplexMatrix adiabatic_hamiltonian(const Protocol& protocol, double s);

/// P0 H P0 in the dark basis.
ComplexMatrix projected_hamiltonian(const ComplexMatrix& h, const DarkSpace& ds);

enum class MemorySource { Integral, Adiabatic };
enum class EffectiveOrder { First, Second };

/// The reduced dark-space dynamics of a protocol: H0(s), the memory kernel
/// X_tau, the effective jump ell_tau and the holonomy.
///
/// Times are dimensionless tau = gamma t in [0, gammaT]; phases s = tau / gammaT.
class EffectiveGenerator {
public:
    EffectiveGenerator(Protocol protocol, DarkSpace ds);

    const Protocol& protocol() const { return protocol_; }
    const DarkSpace& dark() const { return ds_; }
    double gamma_t() const { return protocol_.gamma_t(); }
    const ComplexMatrix& ldl() const { return ldl_; }

    ComplexMatrix hamiltonian(double s) const { return adiabatic_hamiltonian(protocol_, s); }
    ComplexMatrix h0(double s) const;

    /// X_tau = int_0^tau e^{L^+L (s'-tau)/2} P_perp H(s'/gammaT) P0 ds'
    /// with the exponential applied per eigenmode of L^+L.
    ComplexMatrix x_tau_integral(double tau) const;
    /// 2 (L^+L)^+ P_perp H(tau/gammaT) P0.
    ComplexMatrix x_tau_adiabatic(double tau) const;
    ComplexMatrix x_tau(double tau, MemorySource source) const;
    /// C_tau = X_tau + X_tau^+.
    ComplexMatrix c_tau(double tau, MemorySource source = MemorySource::Integral) const;

    /// ell_tau = P0 L X_tau P0 in the dark basis.
    ComplexMatrix ell(double tau, MemorySource source = MemorySource::Integral) const;
    /// ell_{mu,tau} = P0 M_mu L C_tau P0 for a Kraus set of the asymptotic channel.
    std::vector<ComplexMatrix> ell_kraus(double tau, const std::vector<ComplexMatrix>& kraus,
                                         MemorySource source = MemorySource::Integral) const;

    /// Residual || dX/dtau + L^+L X / 2 - P_perp H P0 || with dX/dtau from a
    /// five-point stencil of x_tau_integral.
    double c_tau_residual(double tau, double h = 1e-2) const;

    /// Right-hand side of the reduced equation at tau for a d x d state.
    ComplexMatrix rhs(const ComplexMatrix& rho0, double tau,
                      MemorySource source = MemorySource::Integral,
                      EffectiveOrder order = EffectiveOrder::Second) const;

    /// V_tau = T exp(-i int_0^{tau/gammaT} H0(s) ds).
    ComplexMatrix holonomy(double tau, int steps = 4096) const;

    QuadratureOptions quadrature;

private:
    Protocol protocol_;
    DarkSpace ds_;
    ComplexMatrix p_perp_;
    ComplexMatrix ldl_;
    ComplexMatrix ldl_pinv_;
    ComplexMatrix bright_modes_;     ///< eigenvectors of L^+L with nonzero eigenvalue
    Eigen::VectorXd bright_rates_;   ///< the matching eigenvalues
};

// Free-function forms of the reduced dynamics.
ComplexMatrix x_tau_integral(const EffectiveGenerator& eff, double tau);
ComplexMatrix x_tau_adiabatic(const EffectiveGenerator& eff, double tau);
ComplexMatrix effective_jump(const EffectiveGenerator& eff, double tau,
                             MemorySource source = MemorySource::Integral);
ComplexMatrix effective_rhs(const DensityMatrix& rho0, const EffectiveGenerator& eff, double tau,
                            MemorySource source = MemorySource::Integral);
ComplexMatrix berry_holonomy(const EffectiveGenerator& eff, double tau, int steps = 4096);

struct EffectiveEvolveOptions {
    EffectiveOrder order = EffectiveOrder::Second;
    double rtol = 1e-10;
    double atol = 1e-13;
    double max_step = 0.1;
    /// Empty: only the final state at gammaT (plus tau = 0) is recorded.
    std::vector<double> output_times;
};

/// Integrates the reduced equation over [0, gammaT] (or to the last output
/// time). The memory kernel is carried along as the solution of its defining
/// ODE dX/dtau = P_perp H P0 - L^+L X / 2, X(0) = 0.
Trajectory evolve_effective(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                            const EffectiveEvolveOptions& options = {});

enum class CycleRoute { ClosedForm, Direct };

struct CycleGridOptions {
    /// Simpson panels per unit tau (rounded up to an even count, at least 2000).
    double panels_per_tau = 8.0;
    int min_panels = 2000;
};

/// V and ell sampled on a uniform tau grid over one period, shared by the
/// closed-form end-of-cycle state and the purity-loss prediction.
struct CycleGrid {
    std::vector<double> tau;
    std::vector<ComplexMatrix> holonomy;  ///< V_tau
    std::vector<ComplexMatrix> ell;       ///< ell_tau (dark basis)

    static CycleGrid build(const EffectiveGenerator& eff, const CycleGridOptions& options = {});
    /// Composite Simpson weight of node k.
    double weight(std::size_t k) const;
};

/// End-of-cycle dark-space state. ClosedForm: V (rho + (1/gammaT^2) int
/// D[l_tau] rho dtau) V^+ with l = V^+ ell V. Direct: integrate the reduced
/// equation over one period.
DensityMatrix end_of_cycle_state(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                                 CycleRoute route = CycleRoute::ClosedForm,
                                 const CycleGridOptions& grid = {});

/// Full-dimension variant: rejects states leaking out of the dark space.
DensityMatrix end_of_cycle_state_full(const DensityMatrix& rho_full,
                                      const EffectiveGenerator& eff,
                                      CycleRoute route = CycleRoute::ClosedForm);

struct Reconstruction {
    DensityMatrix state;
    double trace_renormalization = 0.0;
};

/// Rotating-frame full state from the dark-space state via
/// K = K0 + eps K1 + eps^2 K2 with K0 the embedding, K1 = -i[C, .],
/// K2 = C . C - {C^2, .}/2, eps = 1/gammaT.
Reconstruction reconstruct_full_state(const DensityMatrix& rho_ins, const EffectiveGenerator& eff,
                                      double tau, int max_order = 2);

}  // namespace darkspace
