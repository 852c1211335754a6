// The three-stage computation with cost independent of degree and order:
// the nonoscillatory phase function alpha and its derivative on the
// oscillatory side of the turning point, and the offset logarithms
// log Q-tilde + nu and log P-tilde - nu on the nonoscillatory side.
#pragma once

#include "aleg/cheb.hpp"
#include "aleg/params.hpp"

namespace aleg::phase {

struct PhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Left endpoint of the phase-function domain: the turning point
// arcsin(sqrt(mu^2-1/4)/(nu+1/2)) for mu >= 1, else nu^(-3/2).
double turning_point(const LegendreParams& p);

// alpha'(pi/2) from the gamma-function closed form (log-gamma evaluated),
// and alpha''(pi/2) = 0.
std::pair<double, double> alpha_terminal(const LegendreParams& p);

struct PhaseFunction {
    LegendreParams params;
    double tStar = 0.0;
    cheb::PiecewiseExpansion alpha, alphaPrime, alphaPrimePrime, alphaPrime3;
    // exact (double-double) value of alpha at the left edge of each alpha
    // piece, for sampling without losing phase accuracy
    std::vector<DoubleDouble> alphaLeftDD;

    double alpha_at(double t) const { return cheb::cheb_eval_piecewise(alpha, t); }
    DoubleDouble alpha_at_dd(double t) const;
    double alpha_prime_at(double t) const { return cheb::cheb_eval_piecewise(alphaPrime, t); }
    double alpha_pp_at(double t) const { return cheb::cheb_eval_piecewise(alphaPrimePrime, t); }
};

// Stage one: solve the phase-derivative equation backward from pi/2 and
// integrate, anchored at alpha(pi/2) = 2 pi + (pi/2)(nu - mu). For
// 1/2 < mu < 1 the stretch below the true turning point is evaluated
// directly from the series logarithms instead of marching through it.
PhaseFunction compute_phase(const LegendreParams& p, double epsilon = 1e-14, int k = 30);

// Same, on [tLeft, pi/2] for a caller-chosen left endpoint (the mu < 1
// table regions use nu^{-3/2} even when their boundary sample sits at
// mu = 1). Any stretch below the true turning point goes through the
// series logarithms.
PhaseFunction compute_phase_domain(const LegendreParams& p, double tLeft,
                                   double epsilon = 1e-14, int k = 30);

// The matching point where alpha = 7 pi/4, a quarter period inside the
// oscillatory region, where Q-tilde is positive and both terminal values
// are well conditioned. Clamped to tStar if alpha(tStar) already exceeds
// the target (does not occur in practice).
double find_t0(const PhaseFunction& ph);

struct LogSolutions {
    LegendreParams params;
    double tLo = 0.0, tHi = 0.0;  // [tStar/100, tStar]
    cheb::PiecewiseExpansion value;   // offset log (log Q + nu or log P - nu)
    cheb::PiecewiseExpansion deriv;   // d/dt of the log itself
    cheb::PiecewiseExpansion deriv2;  // second derivative (residual checks)
};

// Stage two: log Q-tilde + nu on [tStar/100, tStar] by a terminal-value
// Riccati solve launched at t0. Requires mu >= 1.
LogSolutions compute_logq(const LegendreParams& p, const PhaseFunction& ph,
                          double epsilon = 1e-14, int k = 30);

// Stage three: log P-tilde - nu on [tStar/100, tStar] by an initial-value
// Riccati solve seeded from the series (nu <= 10^4) or the Bessel
// expansion (nu > 10^4). Requires mu >= 1.
LogSolutions compute_logp(const LegendreParams& p, double epsilon = 1e-14, int k = 30);

// Kummer residual max over collocation nodes, scaled by lambda^2:
// |q - w^2 - (1/2) w''/w + (3/4)(w'/w)^2| with w = alpha'.
double kummer_residual(const PhaseFunction& ph);
// Riccati residual max over nodes, scaled by lambda^2: |r'' + r'^2 + q|.
double riccati_residual(const LogSolutions& ls, double offset_sign);

}  // namespace aleg::phase
