#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "darkspace/linalg.hpp"
#include "darkspace/ode.hpp"

namespace darkspace {

/// Tolerances a density matrix must satisfy.
struct StateTolerances {
    double hermiticity = 1e-10;
    double trace = 1e-10;
    double min_eigenvalue = -1e-9;
};

/// A Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    /// Validates against `tol`; throws ValidationError on violation.
    explicit DensityMatrix(ComplexMatrix mat, const StateTolerances& tol = {});

    /// Skips validation. For integrator internals that check invariants
    /// themselves.
    static DensityMatrix unchecked(ComplexMatrix mat);

    /// |psi><psi| for a normalised psi.
    static DensityMatrix pure(const ComplexVector& psi);

    const ComplexMatrix& matrix() const { return mat_; }
    Eigen::Index dim() const { return mat_.rows(); }

private:
    struct NoCheck {};
    DensityMatrix(ComplexMatrix mat, NoCheck) : mat_(std::move(mat)) {}
    ComplexMatrix mat_;
};

double min_eigenvalue(const ComplexMatrix& hermitian);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// The pair (prefactor * H, {L_k}) of a Lindblad equation.
struct LindbladGenerator {
    std::optional<ComplexMatrix> hamiltonian;
    std::vector<ComplexMatrix> jumps;
    double hamiltonian_prefactor = 1.0;

    Eigen::Index dim() const;
    /// Throws ValidationError on inconsistent shapes or a non-Hermitian H.
    void validate() const;
};

/// -i p [H, rho] + sum_k (L rho L^+ - 1/2 {L^+L, rho}).
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladGenerator& gen);
ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladGenerator& gen);

struct StepStats {
    long accepted = 0;
    long rejected = 0;
};

/// Worst invariant deviations seen over a run.
struct InvariantStats {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 1.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    StepStats step_stats;
    InvariantStats invariants;

    const DensityMatrix& final_state() const { return states.back(); }
};

using GeneratorFunction = std::function<LindbladGenerator(double)>;

struct IntegrateOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// Initial step; <= 0 selects span / 1000.
    double initial_step = 0.0;
    double max_step = 0.1;
    std::vector<double> output_times;
    /// Abort thresholds are this multiple of the invariant tolerances.
    double abort_factor = 100.0;
    StateTolerances tolerances{1e-10, 1e-9, -1e-8};
};

/// Adaptive RK 4(5) evolution of a density matrix under a (possibly
/// time-dependent) generator. Throws NumericalError on step underflow or when
/// an invariant drifts beyond abort_factor times its tolerance.
Trajectory integrate(const GeneratorFunction& gen_of_t, const DensityMatrix& rho0, double t0,
                     double t1, const IntegrateOptions& options = {});

// ---- superoperators (column-major vectorisation: vec(A X B) = (B^T (x) A) vec X)

ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim);

/// Matrix S with S vec(rho) = vec(lindblad_rhs(rho, gen)).
ComplexMatrix vectorize(const LindbladGenerator& gen);

/// Applies a superoperator to an operator.
ComplexMatrix apply_superoperator(const ComplexMatrix& superop, const ComplexMatrix& rho);

inline constexpr double kKernelTolerance = 1e-8;

struct GapResult {
    /// min -Re(lambda) over eigenvalues with |lambda| > kernel threshold;
    /// zero when there is no such eigenvalue.
    double gap = 0.0;
    bool gapless = true;
    Eigen::VectorXcd eigenvalues;
};

GapResult spectral_gap(const ComplexMatrix& superop, double kernel_tol = kKernelTolerance);

/// Spectral projector onto ker(S) along range(S), i.e. lim_{t->inf} e^{tS}.
/// Throws ValidationError when a non-decaying nonzero mode makes the limit
/// undefined.
ComplexMatrix asymptotic_channel(const ComplexMatrix& superop, double tol = kKernelTolerance);

/// Choi matrix C = sum_ij E_ij (x) R(E_ij).
ComplexMatrix choi_matrix(const ComplexMatrix& channel);

struct KrausOptions {
    double cp_tolerance = 1e-8;
    double discard_below = 1e-10;
};

/// Kraus operators from the Choi eigendecomposition, ordered by descending
/// Choi weight. Throws NumericalError if the Choi matrix has an eigenvalue
/// below -cp_tolerance.
std::vector<ComplexMatrix> kraus_from_channel(const ComplexMatrix& channel,
                                              const KrausOptions& options = {});

/// Same, then remixed (unitary Kraus freedom) so that the blocks P M P are
/// mutually orthogonal and concentrated in the leading operators, each with
/// Tr(P M) >= 0.
std::vector<ComplexMatrix> kraus_from_channel(const ComplexMatrix& channel,
                                              const ComplexMatrix& block_projector,
                                              const KrausOptions& options = {});

ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& kraus, const ComplexMatrix& rho);

}  // namespace darkspace
