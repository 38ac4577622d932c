#pragma once

#include <functional>
#include <vector>

#include "darkspace/linalg.hpp"

namespace darkspace {

/// Options for the embedded Dormand-Prince 5(4) integrator.
struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// Initial step; <= 0 selects (t1 - t0) / 1000.
    double initial_step = 0.0;
    double max_step = 0.1;
    long max_steps = 50'000'000;
    /// Times at which the solution is recorded. The integrator lands on them
    /// exactly. Empty: record every accepted step.
    std::vector<double> output_times;
};

using OdeRhs = std::function<ComplexVector(double, const ComplexVector&)>;
/// Called after every accepted step with (t, y). May throw to abort.
using StepObserver = std::function<void(double, const ComplexVector&)>;

struct OdeSolution {
    std::vector<double> times;
    std::vector<ComplexVector> states;
    long accepted = 0;
    long rejected = 0;
};

/// Adaptive Runge-Kutta integration of y' = f(t, y) on [t0, t1] with PI step
/// control. The initial point is always recorded. Throws NumericalError on
/// step-size underflow (message carries the failing t).
OdeSolution solve_ode(const OdeRhs& f, const ComplexVector& y0, double t0, double t1,
                      const OdeOptions& options = {}, const StepObserver& observer = {});

}  // namespace darkspace
