#include "darkspace/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace darkspace {

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
    const ComplexMatrix ldl = l.adjoint() * l;
    return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

void require_qubit(Eigen::Index d, const char* what) {
    if (d != 2) {
        std::ostringstream msg;
        msg << what << ": requires a two-dimensional dark space (got " << d << ")";
        throw ValidationError(msg.str());
    }
}

void merge(InvariantStats& into, const InvariantStats& from) {
    into.max_trace_error = std::max(into.max_trace_error, from.max_trace_error);
    into.max_hermiticity_error = std::max(into.max_hermiticity_error, from.max_hermiticity_error);
    into.min_eigenvalue = std::min(into.min_eigenvalue, from.min_eigenvalue);
}

}  // namespace

// ---------------------------------------------------------------- observables

double purity(const ComplexMatrix& rho) { return (rho * rho).trace().real(); }

double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector BlochVector::from(const std::vector<double>& xyz) {
    if (xyz.size() != 3) throw ValidationError("Bloch vector needs exactly three components");
    for (double c : xyz) {
        if (!std::isfinite(c)) throw ValidationError("Bloch vector component is not finite");
    }
    BlochVector n{xyz[0], xyz[1], xyz[2]};
    if (n.norm() > 1.0 + 1e-9) throw ValidationError("Bloch vector longer than 1");
    return n;
}

BlochVector bloch_of(const ComplexMatrix& rho) {
    require_qubit(rho.rows(), "bloch_of");
    return {(pauli(0) * rho).trace().real(), (pauli(1) * rho).trace().real(),
            (pauli(2) * rho).trace().real()};
}

BlochVector bloch_of(const DensityMatrix& rho) { return bloch_of(rho.matrix()); }

DensityMatrix state_from_bloch(const BlochVector& n) {
    if (n.norm() > 1.0 + 1e-9) throw ValidationError("Bloch vector longer than 1");
    ComplexMatrix rho = 0.5 * (ComplexMatrix::Identity(2, 2) + n.x * pauli(0) + n.y * pauli(1) +
                               n.z * pauli(2));
    return DensityMatrix(std::move(rho));
}

BlochVector bloch_transport(const BlochVector& n, const ComplexMatrix& v) {
    require_qubit(v.rows(), "bloch_transport");
    const ComplexMatrix ns = n.x * pauli(0) + n.y * pauli(1) + n.z * pauli(2);
    const ComplexMatrix m = v * ns * v.adjoint();
    return {0.5 * (pauli(0) * m).trace().real(), 0.5 * (pauli(1) * m).trace().real(),
            0.5 * (pauli(2) * m).trace().real()};
}

// ---------------------------------------------------------------- predictions

double purity_prediction_general(const DensityMatrix& rho_init, const CycleGrid& grid,
                                 double gamma_t) {
    const ComplexMatrix& rho = rho_init.matrix();
    double integral = 0.0;
    for (std::size_t k = 0; k < grid.tau.size(); ++k) {
        const ComplexMatrix& v = grid.holonomy[k];
        const ComplexMatrix l = v.adjoint() * grid.ell[k] * v;
        const ComplexMatrix comm = commutator(rho, l.adjoint());
        integral += grid.weight(k) * (comm * l * rho).trace().real();
    }
    return purity(rho) - 2.0 * integral / (gamma_t * gamma_t);
}

double purity_prediction_general(const DensityMatrix& rho_init, const EffectiveGenerator& eff,
                                 const CycleGridOptions& options) {
    if (rho_init.dim() != eff.dark().d) {
        throw ValidationError("purity_prediction_general: state is not d x d");
    }
    return purity_prediction_general(rho_init, CycleGrid::build(eff, options), eff.gamma_t());
}

ComplexMatrix spin32_h0(const PathSpec& path, double s) {
    const double th = path.theta.value(s);
    const double dth = path.theta.derivative(s);
    const double dph = path.phi.derivative(s);
    return -dth * pauli(1) - dph * (0.5 * std::cos(th) * pauli(2) - std::sin(th) * pauli(0));
}

double purity_prediction_spin32(const PathSpec& path, const BlochVector& n0, double gamma_t) {
    if (!(gamma_t > 0.0)) throw ValidationError("purity_prediction_spin32: gammaT must be positive");
    path.validate();
    const double eps = 1.0 / gamma_t;
    // y = [a, b, V (column-major 2x2), loss]
    auto rhs = [&](double tau, const ComplexVector& y) -> ComplexVector {
        const double s = tau * eps;
        const double a = y(0).real();
        const double b = y(1).real();
        const Eigen::Map<const ComplexMatrix> v(y.data() + 2, 2, 2);
        const ComplexMatrix h0 = spin32_h0(path, s);
        ComplexVector out(7);
        out(0) = 1.5 * (path.phi.derivative(s) * std::sin(path.theta.value(s)) - a);
        out(1) = 1.5 * (path.theta.derivative(s) - b);
        Eigen::Map<ComplexMatrix> dv(out.data() + 2, 2, 2);
        dv = (-kI * eps) * h0 * v;
        const BlochVector n = bloch_transport(n0, v);
        out(6) = 2.0 * eps * eps * b * b * (n.x * n.x + n.y * n.y);
        return out;
    };
    ComplexVector y0 = ComplexVector::Zero(7);
    y0(2) = 1.0;
    y0(5) = 1.0;
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-14;
    opts.max_step = 0.25;
    opts.output_times = {gamma_t};
    const OdeSolution sol = solve_ode(rhs, y0, 0.0, gamma_t, opts);
    const double gamma0 = 0.5 * (1.0 + n0.norm() * n0.norm());
    return gamma0 - sol.states.back()(6).real();
}

double spin32_leading_loss(const BlochVector& n0, double gamma_t) {
    return 4.0 * kPi * kPi * (1.0 + n0.y * n0.y) / gamma_t;
}

// ---------------------------------------------------------------- gauge

ComplexMatrix hermitian_from_params(Eigen::Index d, const std::vector<double>& params) {
    const auto expected = static_cast<std::size_t>(d * d);
    if (params.size() != expected) {
        std::ostringstream msg;
        msg << "hermitian_from_params: expected " << expected << " parameters, got "
            << params.size();
        throw ValidationError(msg.str());
    }
    ComplexMatrix g = ComplexMatrix::Zero(d, d);
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < d; ++i) g(i, i) = params[p++];
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            g(i, j) = Complex(params[p], params[p + 1]);
            g(j, i) = std::conj(g(i, j));
            p += 2;
        }
    }
    return g;
}

namespace {

ComplexMatrix complement_basis(const DarkSpace& ds) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ds.complement());
    const Eigen::Index n = ds.dim();
    const Eigen::Index k = n - ds.d;
    // eigenvalues ascending: the last k are the unit ones
    return es.eigenvectors().rightCols(k);
}

}  // namespace

ComplexMatrix gauge_transform(const DarkSpace& ds, const std::vector<double>& dark_params,
                              const std::vector<double>& bright_params) {
    const Eigen::Index n = ds.dim();
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    if (!dark_params.empty()) g += ds.embed(hermitian_from_params(ds.d, dark_params));
    if (!bright_params.empty()) {
        const ComplexMatrix c = complement_basis(ds);
        g += c * hermitian_from_params(c.cols(), bright_params) * c.adjoint();
    }
    return matrix_exp(kI * g);
}

double GaugeSpec::lambda(double s) const {
    return profile == GaugeProfile::Static ? 1.0 : std::sin(2.0 * kPi * s);
}

double GaugeSpec::lambda_derivative(double s) const {
    return profile == GaugeProfile::Static ? 0.0 : 2.0 * kPi * std::cos(2.0 * kPi * s);
}

ComplexMatrix GaugeSpec::omega(double s) const { return matrix_exp((kI * lambda(s)) * generator); }

GaugeSpec dark_sigma_z_gauge(const DarkSpace& ds, double chi, GaugeProfile profile) {
    require_qubit(ds.d, "dark_sigma_z_gauge");
    return {ds.embed(chi * pauli(2)), profile};
}

double spectrum_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size()) throw ValidationError("spectrum_distance: size mismatch");
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double dist = std::abs(a(i) - b(j));
            if (dist < best) {
                best = dist;
                pick = j;
            }
        }
        used[static_cast<std::size_t>(pick)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

namespace {

struct GaugedRun {
    std::vector<ComplexMatrix> ell;  // at the sample times
    ComplexMatrix final_state;
    ComplexMatrix holonomy;
};

GaugedRun run_gauged(const Protocol& protocol, const DarkSpace& ds, const GaugeSpec& gauge,
                     const DensityMatrix& rho_init, const std::vector<double>& samples) {
    const double gt = protocol.gamma_t();
    const double eps = 1.0 / gt;
    const Eigen::Index n = ds.dim();
    const Eigen::Index d = ds.d;
    const ComplexMatrix& l = protocol.rotating_jump();
    const ComplexMatrix p_perp = ds.complement();

    auto gauged_h = [&](double s) -> ComplexMatrix {
        const ComplexMatrix w = gauge.omega(s);
        return w * adiabatic_hamiltonian(protocol, s) * w.adjoint() -
               gauge.lambda_derivative(s) * gauge.generator;
    };

    const Eigen::Index nrho = d * d;
    auto rhs = [&](double tau, const ComplexVector& y) -> ComplexVector {
        const double s = tau * eps;
        const ComplexMatrix w = gauge.omega(s);
        const ComplexMatrix lw = w * l * w.adjoint();
        const ComplexMatrix hw = w * adiabatic_hamiltonian(protocol, s) * w.adjoint() -
                                 gauge.lambda_derivative(s) * gauge.generator;
        const Eigen::Map<const ComplexMatrix> rho(y.data(), d, d);
        const Eigen::Map<const ComplexMatrix> ymat(y.data() + nrho, n, d);
        ComplexVector out(y.size());
        Eigen::Map<ComplexMatrix> drho(out.data(), d, d);
        Eigen::Map<ComplexMatrix> dy(out.data() + nrho, n, d);
        const ComplexMatrix h0 = ds.compress(hw);
        const ComplexMatrix ell = ds.basis.adjoint() * lw * ymat;
        drho = (-kI * eps) * (h0 * rho - rho * h0) + eps * eps * dissipator(ell, rho);
        dy = p_perp * hw * ds.basis - 0.5 * (lw.adjoint() * lw) * ymat;
        return out;
    };

    const ComplexMatrix w0 = ds.compress(gauge.omega(0.0));
    ComplexVector y0 = ComplexVector::Zero(nrho + n * d);
    y0.head(nrho) = vec(w0 * rho_init.matrix() * w0.adjoint());

    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-13;
    opts.max_step = 0.1;
    opts.output_times = samples;
    opts.output_times.push_back(gt);
    std::sort(opts.output_times.begin(), opts.output_times.end());
    opts.output_times.erase(std::unique(opts.output_times.begin(), opts.output_times.end()),
                            opts.output_times.end());
    const OdeSolution sol = solve_ode(rhs, y0, 0.0, gt, opts);

    GaugedRun run;
    for (double t : samples) {
        const auto it = std::find(sol.times.begin(), sol.times.end(), t);
        const auto& y = sol.states[static_cast<std::size_t>(it - sol.times.begin())];
        const ComplexMatrix w = gauge.omega(t * eps);
        const Eigen::Map<const ComplexMatrix> ymat(y.data() + nrho, n, d);
        run.ell.push_back(ds.basis.adjoint() * (w * l * w.adjoint()) * ymat);
    }
    run.final_state = Eigen::Map<const ComplexMatrix>(sol.states.back().data(), d, d);
    run.holonomy = ordered_exponential(
        [&](double s) -> ComplexMatrix { return -kI * ds.compress(gauged_h(s)); }, 0.0, 1.0, 4096);
    return run;
}

}  // namespace

GaugeSample gauge_sample(const Protocol& protocol, const DarkSpace& ds, const GaugeSpec& gauge,
                         const DensityMatrix& rho_init, int tau_samples) {
    const Eigen::Index n = ds.dim();
    if (gauge.generator.rows() != n || gauge.generator.cols() != n) {
        throw ValidationError("gauge: generator dimension mismatch");
    }
    if (hermiticity_error(gauge.generator) > 1e-12 * std::max(1.0, gauge.generator.norm())) {
        throw ValidationError("gauge: generator is not Hermitian");
    }
    if ((ds.projector * gauge.generator * ds.complement()).norm() > 1e-12) {
        throw ValidationError("gauge: generator does not commute with the dark projector");
    }
    if (tau_samples < 1) throw ValidationError("gauge: need at least one tau sample");
    const double gt = protocol.gamma_t();
    std::vector<double> samples;
    for (int k = 0; k < tau_samples; ++k) samples.push_back((k + 0.5) / tau_samples * gt);

    const GaugeSpec identity{ComplexMatrix::Zero(n, n), GaugeProfile::Static};
    const GaugedRun plain = run_gauged(protocol, ds, identity, rho_init, samples);
    const GaugedRun rotated = run_gauged(protocol, ds, gauge, rho_init, samples);

    GaugeSample out;
    out.gamma_t = gt;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const ComplexMatrix w0 = ds.compress(gauge.omega(samples[k] / gt));
        const double defect = (rotated.ell[k] - w0 * plain.ell[k] * w0.adjoint()).norm();
        out.defect = std::max(out.defect, defect);
    }
    out.purity_original = purity(plain.final_state);
    out.purity_gauged = purity(rotated.final_state);
    Eigen::ComplexEigenSolver<ComplexMatrix> ea(plain.holonomy);
    Eigen::ComplexEigenSolver<ComplexMatrix> eb(rotated.holonomy);
    out.holonomy_spectrum_difference = spectrum_distance(ea.eigenvalues(), eb.eigenvalues());
    return out;
}

GaugeCovarianceReport gauge_covariance_check(const Protocol& protocol, const DarkSpace& ds,
                                             const GaugeSpec& gauge, const DensityMatrix& rho_init,
                                             int tau_samples) {
    GaugeCovarianceReport report;
    report.base = gauge_sample(protocol, ds, gauge, rho_init, tau_samples);
    report.doubled =
        gauge_sample(protocol.with_gamma_t(2.0 * protocol.gamma_t()), ds, gauge, rho_init, tau_samples);
    const double gt = protocol.gamma_t();
    // defects at roundoff level mean exact covariance; their ratio is noise
    constexpr double kExact = 1e-12;
    report.defect_ratio = report.base.defect > 0.0 ? report.doubled.defect / report.base.defect : 0.0;
    report.defect_decreases = (report.base.defect <= kExact && report.doubled.defect <= kExact) ||
                              report.defect_ratio <= report.max_ratio;
    report.purity_bound = 10.0 / (gt * gt);
    const double doubled_bound = 10.0 / (4.0 * gt * gt);
    report.purity_agrees =
        std::abs(report.base.purity_gauged - report.base.purity_original) <= report.purity_bound &&
        std::abs(report.doubled.purity_gauged - report.doubled.purity_original) <= doubled_bound;
    report.spectra_agree = std::max(report.base.holonomy_spectrum_difference,
                                    report.doubled.holonomy_spectrum_difference) <= 1e-8;
    return report;
}

// ---------------------------------------------------------------- exact runs

namespace {

IntegrateOptions integrate_options(const ExactOptions& options, std::vector<double> output_times,
                                   double gamma_t) {
    IntegrateOptions io;
    io.rtol = options.rtol;
    io.atol = options.atol;
    io.max_step = options.max_step;
    io.output_times = std::move(output_times);
    if (io.output_times.empty()) io.output_times = {gamma_t};
    return io;
}

void require_dark_state(const DarkSpace& ds, const DensityMatrix& rho_init) {
    if (rho_init.dim() != ds.d) throw ValidationError("initial state is not d x d");
}

}  // namespace

Trajectory exact_lab_cycle(const Protocol& protocol, const DarkSpace& ds,
                           const DensityMatrix& rho_init, const ExactOptions& options,
                           std::vector<double> output_times) {
    require_dark_state(ds, rho_init);
    const ComplexMatrix u0 = protocol.unitary(0.0);
    const DensityMatrix start(u0.adjoint() * ds.embed(rho_init.matrix()) * u0);
    const double gt = protocol.gamma_t();
    return integrate([&](double tau) { return lab_generator(protocol, tau); }, start, 0.0, gt,
                     integrate_options(options, std::move(output_times), gt));
}

Trajectory exact_rotating_cycle(const Protocol& protocol, const DarkSpace& ds,
                                const DensityMatrix& rho_init, const ExactOptions& options,
                                std::vector<double> output_times) {
    require_dark_state(ds, rho_init);
    const DensityMatrix start(ds.embed(rho_init.matrix()));
    const double gt = protocol.gamma_t();
    return integrate([&](double tau) { return rotating_generator(protocol, tau); }, start, 0.0,
                     gt, integrate_options(options, std::move(output_times), gt));
}

double EffectiveComparison::max_distance() const {
    return distances.empty() ? 0.0 : *std::max_element(distances.begin(), distances.end());
}

EffectiveComparison compare_effective_vs_full(const Protocol& protocol, const DarkSpace& ds,
                                              const DensityMatrix& rho_init, int n_checkpoints,
                                              const ExactOptions& options) {
    if (n_checkpoints < 1) throw ValidationError("compare_effective_vs_full: need a checkpoint");
    const double gt = protocol.gamma_t();
    std::vector<double> times;
    for (int k = 1; k <= n_checkpoints; ++k) times.push_back(gt * k / n_checkpoints);

    const Trajectory exact = exact_rotating_cycle(protocol, ds, rho_init, options, times);
    const EffectiveGenerator eff(protocol, ds);
    EffectiveEvolveOptions eo;
    eo.output_times = times;
    const Trajectory second = evolve_effective(rho_init, eff, eo);
    eo.order = EffectiveOrder::First;
    const Trajectory first = evolve_effective(rho_init, eff, eo);

    EffectiveComparison cmp;
    cmp.invariants = exact.invariants;
    // index 0 is tau = 0 in every trajectory
    for (std::size_t k = 1; k < exact.times.size(); ++k) {
        const ComplexMatrix& full = exact.states[k].matrix();
        const ComplexMatrix block = ds.compress(full);
        cmp.times.push_back(exact.times[k]);
        cmp.distances.push_back(trace_distance(block, second.states[k].matrix()));
        cmp.distances_first_order.push_back(trace_distance(block, first.states[k].matrix()));
        cmp.exact_purity.push_back(purity(full));
        cmp.exact_trace.push_back(full.trace().real());
        cmp.exact_min_eigenvalue.push_back(min_eigenvalue(full));
        if (ds.d == 2) cmp.exact_bloch.push_back(bloch_of(block));
    }
    return cmp;
}

// ---------------------------------------------------------------- sweeps

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor) {
    LogLogFit fit;
    if (x.size() != y.size()) throw ValidationError("fit_loglog: size mismatch");
    if (x.size() < 2) {
        fit.reason = "fewer than two points";
        return fit;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > floor) || !std::isfinite(y[i])) {
            fit.reason = "non-positive or negligible value";
            return fit;
        }
    }
    const auto m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    if (denom <= 0.0) {
        fit.reason = "degenerate abscissae";
        return fit;
    }
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    const double mean = sy / m;
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ly = std::log(y[i]);
        const double pred = fit.intercept + fit.slope * std::log(x[i]);
        ss_tot += (ly - mean) * (ly - mean);
        ss_res += (ly - pred) * (ly - pred);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.defined = true;
    return fit;
}

namespace {

SweepPoint sweep_point(const Protocol& protocol, const DarkSpace& ds,
                       const DensityMatrix& rho_init, const SweepOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SweepPoint p;
    p.gamma_t = protocol.gamma_t();
    try {
        const Trajectory lab = exact_lab_cycle(protocol, ds, rho_init, options.exact);
        p.invariants = lab.invariants;
        const double gamma0 = purity(rho_init);
        p.loss_exact = gamma0 - purity(lab.final_state());

        const EffectiveGenerator eff(protocol, ds);
        const CycleGrid grid = CycleGrid::build(eff, options.grid);
        p.loss_eq12 = gamma0 - purity_prediction_general(rho_init, grid, p.gamma_t);
        if (options.closed_form_loss) p.loss_closed_form = options.closed_form_loss(p.gamma_t);

        const EffectiveComparison cmp =
            compare_effective_vs_full(protocol, ds, rho_init, 1, options.exact);
        merge(p.invariants, cmp.invariants);
        p.trace_distance_final = cmp.final_distance();
        p.trace_distance_first_order = cmp.final_distance_first_order();
        p.loss_effective =
            gamma0 - purity(end_of_cycle_state(rho_init, eff, CycleRoute::ClosedForm, options.grid));
        p.ok = true;
    } catch (const Error& e) {
        p.ok = false;
        p.error = e.what();
    }
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return p;
}

}  // namespace

SweepResult convergence_sweep(const Protocol& protocol, const std::vector<double>& gamma_t_values,
                              const DensityMatrix& rho_init, const SweepOptions& options) {
    if (gamma_t_values.size() < 3) throw ValidationError("sweep: need at least three gammaT values");
    for (std::size_t i = 1; i < gamma_t_values.size(); ++i) {
        if (!(gamma_t_values[i] > gamma_t_values[i - 1])) {
            throw ValidationError("sweep: gammaT values must be strictly increasing");
        }
    }
    if (gamma_t_values.back() < 4.0 * gamma_t_values.front()) {
        throw ValidationError("sweep: gammaT values must span at least a factor of 4");
    }
    const auto ds = dark_space(protocol.rotating_jump());
    if (!ds) throw ValidationError("sweep: the jump operator has no dark space");

    SweepResult result;
    if (options.parallel) {
        std::vector<std::future<SweepPoint>> futures;
        for (double gt : gamma_t_values) {
            futures.push_back(std::async(std::launch::async, [&, gt] {
                return sweep_point(protocol.with_gamma_t(gt), *ds, rho_init, options);
            }));
        }
        for (auto& f : futures) result.points.push_back(f.get());
    } else {
        for (double gt : gamma_t_values) {
            result.points.push_back(sweep_point(protocol.with_gamma_t(gt), *ds, rho_init, options));
        }
    }

    std::vector<double> first;
    for (const auto& p : result.points) {
        if (!p.ok) continue;
        result.gamma_t_values.push_back(p.gamma_t);
        result.losses.push_back(p.loss_exact);
        result.errors.push_back(p.trace_distance_final);
        first.push_back(p.trace_distance_first_order);
    }
    result.loss_fit = fit_loglog(result.gamma_t_values, result.losses);
    result.error_fit = fit_loglog(result.gamma_t_values, result.errors);
    result.first_order_fit = fit_loglog(result.gamma_t_values, first);
    return result;
}

}  // namespace darkspace
