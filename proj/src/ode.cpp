#include "darkspace/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace darkspace {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

double error_norm(const ComplexVector& err, const ComplexVector& y, const ComplexVector& ynew,
                  double rtol, double atol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
        const double r = std::abs(err(i)) / scale;
        sum += r * r;
    }
    return std::sqrt(sum / std::max<Eigen::Index>(err.size(), 1));
}

}  // namespace

OdeSolution solve_ode(const OdeRhs& f, const ComplexVector& y0, double t0, double t1,
                      const OdeOptions& options, const StepObserver& observer) {
    if (!(t1 > t0)) throw ValidationError("solve_ode: require t1 > t0");
    if (!(options.rtol > 0.0) || !(options.atol > 0.0)) {
        throw ValidationError("solve_ode: tolerances must be positive");
    }
    std::vector<double> outputs = options.output_times;
    std::sort(outputs.begin(), outputs.end());
    for (double t : outputs) {
        if (t < t0 || t > t1) throw ValidationError("solve_ode: output time outside span");
    }

    OdeSolution sol;
    sol.times.push_back(t0);
    sol.states.push_back(y0);
    std::size_t next_output = 0;
    while (next_output < outputs.size() && outputs[next_output] <= t0) ++next_output;

    const double span = t1 - t0;
    double h = options.initial_step > 0.0 ? options.initial_step : span / 1000.0;
    h = std::min(h, options.max_step);
    double t = t0;
    ComplexVector y = y0;
    ComplexVector k1 = f(t, y);
    double err_prev = 1e-4;

    while (t < t1) {
        if (sol.accepted + sol.rejected >= options.max_steps) {
            throw NumericalError("solve_ode: maximum number of steps exceeded");
        }
        double target = t1;
        if (next_output < outputs.size()) target = std::min(target, outputs[next_output]);
        bool lands = false;
        double step = std::min(h, options.max_step);
        if (t + step >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            step = target - t;
            lands = true;
        }
        if (step < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "solve_ode: step size underflow at t = " << t;
            throw NumericalError(msg.str());
        }

        const ComplexVector k2 = f(t + c2 * step, y + step * (a21 * k1));
        const ComplexVector k3 = f(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
        const ComplexVector k4 = f(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
        const ComplexVector k5 =
            f(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const ComplexVector k6 = f(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 +
                                                         a64 * k4 + a65 * k5));
        const ComplexVector ynew =
            y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const ComplexVector k7 = f(t + step, ynew);
        const ComplexVector err =
            step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = error_norm(err, y, ynew, options.rtol, options.atol);
        if (!std::isfinite(en)) en = 1e10;

        if (en <= 1.0) {
            t = lands ? target : t + step;
            y = ynew;
            k1 = k7;
            ++sol.accepted;
            if (observer) observer(t, y);
            const bool record_all = outputs.empty();
            if (record_all) {
                sol.times.push_back(t);
                sol.states.push_back(y);
            } else if (lands && next_output < outputs.size() && target == outputs[next_output]) {
                sol.times.push_back(t);
                sol.states.push_back(y);
                ++next_output;
            }
            double factor = kSafety * std::pow(std::max(en, 1e-10), -kAlpha) *
                            std::pow(err_prev, kBeta);
            factor = std::clamp(factor, kMinFactor, kMaxFactor);
            // a clamped landing step says nothing about the natural step size
            if (!lands || step >= h) h = step * factor;
            err_prev = std::max(en, 1e-4);
        } else {
            ++sol.rejected;
            const double factor = std::max(kMinFactor, kSafety * std::pow(en, -kAlpha));
            h = step * factor;
        }
    }
    return sol;
}

}  // namespace darkspace
