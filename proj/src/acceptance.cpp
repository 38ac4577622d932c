#include "darkspace/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "darkspace/analysis.hpp"

namespace darkspace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReferenceGammaT = 200.0;

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

PathSpec simplest_path() { return {AnglePath::linear(1), AnglePath::constant(0.0)}; }

/// Lazily computed runs shared between criteria.
class Context {
public:
    explicit Context(const AcceptanceFixture& fx) : fx_(fx) {}

    const AcceptanceFixture& fixture() const { return fx_; }
    const Protocol& protocol() {
        if (!protocol_) protocol_ = spin32_protocol(simplest_path(), kReferenceGammaT);
        return *protocol_;
    }
    const DarkSpace& dark() {
        if (!ds_) ds_ = dark_space(protocol().rotating_jump());
        if (!ds_) throw NumericalError("spin-3/2 jump operator has no dark space");
        return *ds_;
    }
    const SweepResult& sweep() {
        if (!sweep_) {
            SweepOptions opts;
            opts.closed_form_loss = [](double gt) { return spin32_leading_loss({0.0, 0.0, 1.0}, gt); };
            sweep_ = convergence_sweep(protocol(), {100.0, 200.0, 400.0, 800.0},
                                       state_from_bloch({0.0, 0.0, 1.0}), opts);
        }
        return *sweep_;
    }

private:
    AcceptanceFixture fx_;
    std::optional<Protocol> protocol_;
    std::optional<DarkSpace> ds_;
    std::optional<SweepResult> sweep_;
};

bool invariants_ok(const InvariantStats& s, const AcceptanceFixture& fx) {
    return s.max_trace_error <= fx.trace_tol && s.max_hermiticity_error <= fx.hermiticity_tol &&
           s.min_eigenvalue >= fx.positivity_floor;
}

void require_sweep_ok(const SweepResult& sweep) {
    for (const auto& p : sweep.points) {
        if (!p.ok) throw NumericalError(fmt("sweep point gammaT=%g failed: %s", p.gamma_t, p.error.c_str()));
    }
}

CriterionResult purity_law(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{1, "spin-3/2 purity law at gammaT=200", "", "", false, 0.0};
    r.expected = fmt("|loss/(4pi^2(1+ny^2)/200) - 1| <= %.2f for n0=z and n0=y; runtime <= %.0f s",
                     fx.purity_law_rel_tol, fx.runtime_limit_seconds);
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string parts;
    for (const BlochVector n0 : {BlochVector{0, 0, 1}, BlochVector{0, 1, 0}}) {
        const Trajectory lab = exact_lab_cycle(ctx.protocol(), ctx.dark(), state_from_bloch(n0));
        const double loss = 1.0 - purity(lab.final_state());
        const double lead = spin32_leading_loss(n0, kReferenceGammaT);
        const double dev = std::abs(loss / lead - 1.0);
        worst = std::max(worst, dev);
        parts += fmt("%sn0=%s loss=%.5f ref=%.5f dev=%.1f%%", parts.empty() ? "" : "; ",
                     n0.z == 1.0 ? "z" : "y", loss, lead, 100.0 * dev);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.observed = parts + fmt("; %.2f s", secs);
    r.pass = worst <= fx.purity_law_rel_tol && secs <= fx.runtime_limit_seconds;
    return r;
}

CriterionResult algebraic_scaling(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{2, "algebraic scaling of the exact loss", "", "", false, 0.0};
    r.expected = fmt("slope in [%.2f, %.2f], r^2 >= %.2f over gammaT {100,200,400,800}",
                     fx.loss_slope_min, fx.loss_slope_max, fx.loss_fit_min_r2);
    const SweepResult& sweep = ctx.sweep();
    require_sweep_ok(sweep);
    const LogLogFit& fit = sweep.loss_fit;
    std::string losses;
    for (double l : sweep.losses) losses += fmt("%s%.5f", losses.empty() ? "" : ",", l);
    r.observed = fmt("slope=%.4f r^2=%.5f losses=%s", fit.slope, fit.r2, losses.c_str());
    r.pass = fit.defined && fit.slope >= fx.loss_slope_min && fit.slope <= fx.loss_slope_max &&
             fit.r2 >= fx.loss_fit_min_r2;
    return r;
}

CriterionResult effective_accuracy(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{3, "reduced-equation accuracy order", "", "", false, 0.0};
    r.expected = fmt("second-order slope in [%.1f, %.1f]; unitary-only slope in [%.1f, %.1f]",
                     fx.second_order_slope_min, fx.second_order_slope_max,
                     fx.first_order_slope_min, fx.first_order_slope_max);
    const SweepResult& sweep = ctx.sweep();
    require_sweep_ok(sweep);
    const LogLogFit& second = sweep.error_fit;
    const LogLogFit& first = sweep.first_order_fit;
    r.observed = fmt("second-order slope=%.4f (d(100)=%.3e, d(800)=%.3e); unitary-only slope=%.4f",
                     second.slope, sweep.errors.front(), sweep.errors.back(), first.slope);
    r.pass = second.defined && first.defined && second.slope >= fx.second_order_slope_min &&
             second.slope <= fx.second_order_slope_max && first.slope >= fx.first_order_slope_min &&
             first.slope <= fx.first_order_slope_max;
    return r;
}

CriterionResult holonomy_triviality(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{4, "trivial holonomy over the theta loop", "", "", false, 0.0};
    r.expected = fmt("||V_gammaT - 1||_F <= %.0e", fx.holonomy_tol);
    const EffectiveGenerator eff(ctx.protocol(), ctx.dark());
    const ComplexMatrix v = eff.holonomy(eff.gamma_t());
    const double dev = (v - ComplexMatrix::Identity(v.rows(), v.cols())).norm();
    r.observed = fmt("||V - 1||_F = %.3e", dev);
    r.pass = dev <= fx.holonomy_tol;
    return r;
}

CriterionResult jump_closed_form(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{5, "effective jump closed form", "", "", false, 0.0};
    r.expected = fmt("max ||ell - (a + i b sigma_z)|| <= %.0e on tau in [0,20], "
                     "b = 2pi(1-e^{-3tau/2}), a = 0",
                     fx.ell_tol);
    const EffectiveGenerator eff(ctx.protocol(), ctx.dark());
    double worst = 0.0;
    double at = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double tau = 0.05 * k;
        const double b = 2.0 * kPi * (1.0 - std::exp(-1.5 * tau));
        const ComplexMatrix expected = kI * b * pauli(2);
        const double dev = (eff.ell(tau) - expected).norm();
        if (dev > worst) {
            worst = dev;
            at = tau;
        }
    }
    r.observed = fmt("max deviation %.3e at tau=%.2f over 401 samples", worst, at);
    r.pass = worst <= fx.ell_tol;
    return r;
}

CriterionResult gauge_covariance(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{6, "gauge covariance of the effective jump", "", "", false, 0.0};
    r.expected = fmt("defect(200) <= %.1f defect(100); |purity difference| <= %.0f/gammaT^2",
                     fx.defect_ratio_max, fx.gauge_purity_coefficient);
    const Protocol base = ctx.protocol().with_gamma_t(100.0);
    const GaugeSpec gauge = dark_sigma_z_gauge(ctx.dark(), kPi / 7.0, GaugeProfile::Cyclic);
    const DensityMatrix rho = state_from_bloch({0.0, 0.0, 1.0});
    const GaugeCovarianceReport rep = gauge_covariance_check(base, ctx.dark(), gauge, rho);
    const double dp100 = std::abs(rep.base.purity_gauged - rep.base.purity_original);
    const double dp200 = std::abs(rep.doubled.purity_gauged - rep.doubled.purity_original);
    r.observed = fmt("defect(100)=%.4e defect(200)=%.4e ratio=%.3f; dpurity(100)=%.2e "
                     "(bound %.1e) dpurity(200)=%.2e (bound %.1e)",
                     rep.base.defect, rep.doubled.defect, rep.defect_ratio, dp100,
                     fx.gauge_purity_coefficient / 1e4, dp200, fx.gauge_purity_coefficient / 4e4);
    r.pass = rep.defect_ratio <= fx.defect_ratio_max &&
             dp100 <= fx.gauge_purity_coefficient / 1e4 && dp200 <= fx.gauge_purity_coefficient / 4e4;
    return r;
}

CriterionResult memory_machinery(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{7, "memory kernel, asymptotic channel and Kraus set", "", "", false, 0.0};
    r.expected = fmt("C residual <= %.0e at 64 tau; ||R^2-R|| <= %.0e; ||sum M^+M - 1|| <= %.0e; "
                     "exactly one M with P0 M P0 = P0 (tol %.0e)",
                     fx.c_tau_residual_tol, fx.idempotence_tol, fx.completeness_tol,
                     fx.kraus_block_tol);
    const DarkSpace& ds = ctx.dark();
    const EffectiveGenerator eff(ctx.protocol(), ds);
    double residual = 0.0;
    for (int k = 0; k < 64; ++k) {
        residual = std::max(residual, eff.c_tau_residual((k + 0.5) / 64.0 * eff.gamma_t()));
    }
    LindbladGenerator dissipative;
    dissipative.jumps.push_back(ctx.protocol().rotating_jump());
    const ComplexMatrix channel = asymptotic_channel(vectorize(dissipative));
    const double idem = (channel * channel - channel).norm();
    const auto kraus = kraus_from_channel(channel, ds.projector);
    const Eigen::Index n = ds.dim();
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    int matches = 0;
    for (const auto& m : kraus) {
        sum += m.adjoint() * m;
        if ((ds.projector * m * ds.projector - ds.projector).norm() <= fx.kraus_block_tol) ++matches;
    }
    const double completeness = (sum - ComplexMatrix::Identity(n, n)).norm();
    r.observed = fmt("C residual=%.3e; idempotence=%.3e; completeness=%.3e; "
                     "%zu Kraus operators, %d with dark block P0",
                     residual, idem, completeness, kraus.size(), matches);
    r.pass = residual <= fx.c_tau_residual_tol && idem <= fx.idempotence_tol &&
             completeness <= fx.completeness_tol && matches == 1;
    return r;
}

CriterionResult structural_invariants(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{8, "structural invariants across experiments", "", "", false, 0.0};
    r.expected = fmt("trace err <= %.0e, Hermiticity err <= %.0e, min eig >= %.0e, "
                     "rtol/10 refinement shift <= %.0e",
                     fx.trace_tol, fx.hermiticity_tol, fx.positivity_floor, fx.refinement_tol);
    InvariantStats all;
    auto merge = [&](const InvariantStats& s) {
        all.max_trace_error = std::max(all.max_trace_error, s.max_trace_error);
        all.max_hermiticity_error = std::max(all.max_hermiticity_error, s.max_hermiticity_error);
        all.min_eigenvalue = std::min(all.min_eigenvalue, s.min_eigenvalue);
    };
    int runs = 0;
    // sweep (lab frame + rotating-frame comparison per point)
    const SweepResult& sweep = ctx.sweep();
    require_sweep_ok(sweep);
    for (const auto& p : sweep.points) {
        merge(p.invariants);
        runs += 2;
    }
    // spin32-purity with both initial states, effective-vs-full with checkpoints
    const DensityMatrix rho_z = state_from_bloch({0.0, 0.0, 1.0});
    const DensityMatrix rho_y = state_from_bloch({0.0, 1.0, 0.0});
    merge(exact_lab_cycle(ctx.protocol(), ctx.dark(), rho_y).invariants);
    merge(compare_effective_vs_full(ctx.protocol(), ctx.dark(), rho_z, 16).invariants);
    runs += 2;

    double shift = 0.0;
    for (const auto* rho : {&rho_z, &rho_y}) {
        ExactOptions coarse;
        ExactOptions fine;
        fine.rtol = coarse.rtol / 10.0;
        fine.atol = coarse.atol / 10.0;
        const Trajectory a = exact_lab_cycle(ctx.protocol(), ctx.dark(), *rho, coarse);
        const Trajectory b = exact_lab_cycle(ctx.protocol(), ctx.dark(), *rho, fine);
        merge(b.invariants);
        shift = std::max(shift, trace_distance(a.final_state().matrix(), b.final_state().matrix()));
        ++runs;
    }
    r.observed = fmt("%d runs: trace err=%.2e Hermiticity err=%.2e min eig=%.2e refinement shift=%.2e",
                     runs, all.max_trace_error, all.max_hermiticity_error, all.min_eigenvalue, shift);
    r.pass = invariants_ok(all, fx) && shift <= fx.refinement_tol;
    return r;
}

CriterionResult prediction_cross_check(Context& ctx) {
    const auto& fx = ctx.fixture();
    CriterionResult r{9, "quadrature purity prediction vs end-of-cycle purity", "", "", false, 0.0};
    r.expected = fmt("|difference| <= %.0f/gammaT^2 at gammaT {200,800}, or a reported "
                     "systematic residual decaying with exponent <= %.1f",
                     fx.prediction_coefficient, fx.prediction_residual_exponent_max);
    const SweepResult& sweep = ctx.sweep();
    require_sweep_ok(sweep);
    double res200 = -1.0;
    double res800 = -1.0;
    for (const auto& p : sweep.points) {
        const double res = std::abs(p.loss_eq12 - p.loss_effective);
        if (p.gamma_t == 200.0) res200 = res;
        if (p.gamma_t == 800.0) res800 = res;
    }
    if (res200 < 0.0 || res800 < 0.0) throw NumericalError("sweep lacks gammaT 200 or 800");
    const bool agree = res200 <= fx.prediction_coefficient / (200.0 * 200.0) &&
                       res800 <= fx.prediction_coefficient / (800.0 * 800.0);
    if (agree) {
        r.observed = fmt("agreement: residual(200)=%.3e residual(800)=%.3e", res200, res800);
        r.pass = true;
        return r;
    }
    const double exponent = std::log(res800 / res200) / std::log(4.0);
    r.observed = fmt("discrepancy report: residual(200)=%.4e (=%.1f/gammaT^2), residual(800)=%.4e "
                     "(=%.1f/gammaT^2), measured residual exponent %.3f",
                     res200, res200 * 4e4, res800, res800 * 6.4e5, exponent);
    r.pass = std::isfinite(exponent) && exponent <= fx.prediction_residual_exponent_max;
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceFixture& fixture, std::optional<int> only) {
    if (only && (*only < 1 || *only > kCriterionCount)) {
        throw ValidationError(fmt("no acceptance criterion %d", *only));
    }
    Context ctx(fixture);
    const std::vector<std::function<CriterionResult(Context&)>> battery = {
        purity_law,          algebraic_scaling, effective_accuracy,
        holonomy_triviality, jump_closed_form,  gauge_covariance,
        memory_machinery,    structural_invariants, prediction_cross_check};
    static const char* names[] = {"spin-3/2 purity law at gammaT=200",
                                  "algebraic scaling of the exact loss",
                                  "reduced-equation accuracy order",
                                  "trivial holonomy over the theta loop",
                                  "effective jump closed form",
                                  "gauge covariance of the effective jump",
                                  "memory kernel, asymptotic channel and Kraus set",
                                  "structural invariants across experiments",
                                  "quadrature purity prediction vs end-of-cycle purity"};
    std::vector<CriterionResult> results;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (only && *only != id) continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = battery[static_cast<std::size_t>(id - 1)](ctx);
        } catch (const std::exception& e) {
            r = {id, names[id - 1], "criterion completes", std::string("error: ") + e.what(), false, 0.0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace darkspace
