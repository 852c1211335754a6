// Adaptive solver for scalar second order ODEs y'' = f(t, y, y') producing
// piecewise Chebyshev representations of y, y', y''. Per-subinterval spectral
// integral-equation collocation with damped Newton; subintervals accepted on
// coefficient-tail decay and bisected otherwise, marching in the problem
// direction.
#pragma once

#include <functional>

#include "aleg/cheb.hpp"

namespace aleg {

enum class OdeDirection { Forward, Backward };

struct OdeProblem {
    std::function<double(double, double, double)> f;       // (t, y, y') -> y''
    std::function<double(double, double, double)> df_dy;
    std::function<double(double, double, double)> df_dyp;
    // magnitude of the pieces summed inside f (cancellation scale); the
    // achievable absolute accuracy of y'' is this times machine epsilon.
    // Defaults to |f| when unset.
    std::function<double(double, double, double)> f_scale;
    double a = 0.0, b = 1.0;
    OdeDirection direction = OdeDirection::Forward;
    // boundary data at a (forward) or b (backward)
    double y0 = 0.0;
    double yp0 = 0.0;
    int k = 30;                 // expansion order
    double epsilon = 1e-13;     // tail tolerance
    int max_intervals = 300;
    int max_newton = 50;
    // Optional domain guard: reject Newton steps whose y values violate it.
    std::function<bool(double)> y_valid;
};

struct OdeSolution {
    cheb::PiecewiseExpansion y, yp, ypp;
};

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

OdeSolution solve_ode(const OdeProblem& p);

}  // namespace aleg
