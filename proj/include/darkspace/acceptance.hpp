#pragma once

#include <optional>
#include <string>
#include <vector>

namespace darkspace {

/// Thresholds of the acceptance battery. The defaults are the reference
/// values; a fixture file may override any of them.
struct AcceptanceFixture {
    // 1: spin-3/2 purity law at gammaT = 200
    double purity_law_rel_tol = 0.15;
    double runtime_limit_seconds = 60.0;
    // 2: algebraic scaling of the exact loss
    double loss_slope_min = -1.15;
    double loss_slope_max = -0.85;
    double loss_fit_min_r2 = 0.99;
    // 3: reduced-equation accuracy
    double second_order_slope_min = -2.4;
    double second_order_slope_max = -1.6;
    double first_order_slope_min = -1.2;
    double first_order_slope_max = -0.8;
    // 4: holonomy over the cycle
    double holonomy_tol = 1e-8;
    // 5: effective jump closed form on tau in [0, 20]
    double ell_tol = 1e-6;
    // 6: gauge covariance
    double defect_ratio_max = 0.7;
    double gauge_purity_coefficient = 10.0;
    // 7: memory kernel and asymptotic channel
    double c_tau_residual_tol = 1e-7;
    double idempotence_tol = 1e-8;
    double completeness_tol = 1e-8;
    double kraus_block_tol = 1e-8;
    // 8: structural invariants
    double trace_tol = 1e-9;
    double hermiticity_tol = 1e-10;
    double positivity_floor = -1e-8;
    double refinement_tol = 1e-8;
    // 9: quadrature prediction against the end-of-cycle purity
    double prediction_coefficient = 10.0;
    /// A systematic residual is accepted as reported when it decays at least this fast.
    double prediction_residual_exponent_max = -1.5;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string expected;
    std::string observed;
    bool pass = false;
    double seconds = 0.0;
};

/// Runs the battery (or a single criterion). Never throws for numerical
/// trouble inside a criterion: that criterion fails with the message.
std::vector<CriterionResult> run_acceptance(const AcceptanceFixture& fixture = {},
                                            std::optional<int> only = std::nullopt);

inline constexpr int kCriterionCount = 9;

}  // namespace darkspace
