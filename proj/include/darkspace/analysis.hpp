#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "darkspace/effective.hpp"
#include "darkspace/lindblad.hpp"
#include "darkspace/protocols.hpp"

namespace darkspace {

double purity(const ComplexMatrix& rho);
double purity(const DensityMatrix& rho);

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    /// Throws ValidationError on a malformed triple or norm > 1 + 1e-9.
    static BlochVector from(const std::vector<double>& xyz);
};

/// n_a = Tr(sigma_a rho) for a 2 x 2 state.
BlochVector bloch_of(const DensityMatrix& rho);
BlochVector bloch_of(const ComplexMatrix& rho);
/// (1 + n . sigma) / 2.
DensityMatrix state_from_bloch(const BlochVector& n);
/// n_a = Tr(sigma_a V (n . sigma) V^+) / 2.
BlochVector bloch_transport(const BlochVector& n, const ComplexMatrix& v);

/// Gamma_0 - (2 / gammaT^2) int Tr([rho, l^+] l rho) dtau with l = V^+ ell V,
/// evaluated by Simpson quadrature on a cycle grid.
double purity_prediction_general(const DensityMatrix& rho_init, const CycleGrid& grid,
                                 double gamma_t);
double purity_prediction_general(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                                 const CycleGridOptions& options = {});

/// Spin-3/2 purity after one cycle from the closed forms
///   a' = 3/2 (phi' sin(theta) - a),  b' = 3/2 (theta' - b),
///   loss = (2 / gammaT^2) int b^2 (n_x^2 + n_y^2) dtau,
/// with n transported by the projected Hamiltonian
///   H0 = -theta' sigma_y - phi' (cos(theta) sigma_z / 2 - sin(theta) sigma_x).
double purity_prediction_spin32(const PathSpec& path, const BlochVector& n0, double gamma_t);

/// Leading-order loss 4 pi^2 (1 + n_y^2) / gammaT for theta = 2 pi s, phi = 0.
double spin32_leading_loss(const BlochVector& n0, double gamma_t);

/// The spin-3/2 projected Hamiltonian in closed form.
ComplexMatrix spin32_h0(const PathSpec& path, double s);

// ---------------------------------------------------------------- gauge

/// Hermitian d x d matrix from d^2 reals: the diagonal first, then
/// (re, im) of the upper triangle row by row.
ComplexMatrix hermitian_from_params(Eigen::Index d, const std::vector<double>& params);

/// omega = exp(i (P0 G P0 + P_perp G' P_perp)), with G built from dark_params
/// in the dark basis and G' from bright_params in a basis of the complement.
ComplexMatrix gauge_transform(const DarkSpace& ds, const std::vector<double>& dark_params,
                              const std::vector<double>& bright_params = {});

enum class GaugeProfile { Static, Cyclic };

/// omega(s) = exp(i lambda(s) G) with lambda = 1 (Static) or sin(2 pi s)
/// (Cyclic). G must commute with P0.
struct GaugeSpec {
    ComplexMatrix generator;
    GaugeProfile profile = GaugeProfile::Cyclic;

    double lambda(double s) const;
    double lambda_derivative(double s) const;
    ComplexMatrix omega(double s) const;
};

/// Generator P0 G P0 with G = basis (chi sigma_z) basis^+ for a two-dimensional dark space.
GaugeSpec dark_sigma_z_gauge(const DarkSpace& ds, double chi, GaugeProfile profile);

struct GaugeSample {
    double gamma_t = 0.0;
    double defect = 0.0;  ///< max_tau || ell^omega - omega0 ell omega0^+ ||
    double purity_original = 0.0;
    double purity_gauged = 0.0;
    double holonomy_spectrum_difference = 0.0;
};

struct GaugeCovarianceReport {
    GaugeSample base;     ///< at gammaT
    GaugeSample doubled;  ///< at 2 gammaT
    double defect_ratio = 0.0;
    double max_ratio = 0.7;
    double purity_bound = 0.0;  ///< 10 / gammaT^2 (checked at both gammaT)
    bool defect_decreases = false;
    bool purity_agrees = false;
    bool spectra_agree = false;
    bool pass() const { return defect_decreases && purity_agrees && spectra_agree; }
};

/// The reduced dynamics in the rotated frame U^omega = omega U: H^omega =
/// omega H omega^+ + i (d omega/ds) omega^+, L^omega = omega L omega^+.
GaugeSample gauge_sample(const Protocol& protocol, const DarkSpace& ds, const GaugeSpec& gauge,
                         const DensityMatrix& rho_init, int tau_samples = 64);

GaugeCovarianceReport gauge_covariance_check(const Protocol& protocol, const DarkSpace& ds,
                                             const GaugeSpec& gauge, const DensityMatrix& rho_init,
                                             int tau_samples = 64);

/// Greedy nearest-neighbour distance between two spectra of equal size.
double spectrum_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

// ---------------------------------------------------------------- exact runs

struct ExactOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = 0.1;
};

/// Lab-frame integration of d rho / dtau = D[L_{tau/gammaT}] rho over one
/// period from the embedded dark state.
Trajectory exact_lab_cycle(const Protocol& protocol, const DarkSpace& ds,
                           const DensityMatrix& rho_init, const ExactOptions& options = {},
                           std::vector<double> output_times = {});

/// Rotating-frame integration over one period.
Trajectory exact_rotating_cycle(const Protocol& protocol, const DarkSpace& ds,
                                const DensityMatrix& rho_init, const ExactOptions& options = {},
                                std::vector<double> output_times = {});

struct EffectiveComparison {
    std::vector<double> times;
    std::vector<double> distances;              ///< second-order reduced equation
    std::vector<double> distances_first_order;  ///< unitary part only
    std::vector<double> exact_purity;
    std::vector<double> exact_trace;
    std::vector<double> exact_min_eigenvalue;
    std::vector<BlochVector> exact_bloch;  ///< of the compressed exact state (d = 2 only)
    InvariantStats invariants;
    double final_distance() const { return distances.back(); }
    double final_distance_first_order() const { return distances_first_order.back(); }
    double max_distance() const;
};

/// Exact rotating-frame state compressed to the dark block versus the reduced
/// equation at n_checkpoints equally spaced times ending at gammaT.
EffectiveComparison compare_effective_vs_full(const Protocol& protocol, const DarkSpace& ds,
                                              const DensityMatrix& rho_init, int n_checkpoints,
                                              const ExactOptions& options = {});

// ---------------------------------------------------------------- sweeps

struct LogLogFit {
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::string reason;  ///< why the fit is undefined
};

/// Unweighted least squares of log y against log x. Undefined when fewer than
/// two points or any y <= floor.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                     double floor = 1e-10);

struct SweepPoint {
    double gamma_t = 0.0;
    bool ok = false;
    std::string error;
    double loss_exact = 0.0;
    double loss_eq12 = 0.0;
    std::optional<double> loss_closed_form;
    double loss_effective = 0.0;         ///< purity loss of the closed-form end-of-cycle state
    double trace_distance_final = 0.0;
    double trace_distance_first_order = 0.0;
    InvariantStats invariants;
    double seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<double> gamma_t_values;
    std::vector<double> losses;
    std::vector<double> errors;
    LogLogFit loss_fit;
    LogLogFit error_fit;
    LogLogFit first_order_fit;
    double fitted_slope() const { return loss_fit.slope; }
    double fit_r2() const { return loss_fit.r2; }
};

struct SweepOptions {
    ExactOptions exact;
    CycleGridOptions grid;
    bool parallel = true;
    /// Closed-form loss as a function of gammaT, recorded as loss_closed_form.
    std::function<double(double)> closed_form_loss;
};

/// One exact period per gammaT (plus the reduced-equation comparison and the
/// quadrature prediction). Failing points are recorded and skipped by the fits.
/// Requires at least three strictly increasing values spanning a factor of 4.
SweepResult convergence_sweep(const Protocol& protocol, const std::vector<double>& gamma_t_values,
                              const DensityMatrix& rho_init, const SweepOptions& options = {});

}  // namespace darkspace
