// Small-argument asymptotic expansions of the normalized Legendre functions
// in terms of Bessel functions (log form), plus the log-Bessel evaluators
// they require. Used for nu >= 10,000 at t below a hundredth of the turning
// point, where the Bessel argument eta = 2 lambda sin(t/2) is far below the
// order.
#pragma once

#include <stdexcept>

#include "aleg/double_double.hpp"
#include "aleg/params.hpp"

namespace aleg::macdonald {

struct BesselLogValue {
    double order = 0.0;
    double argument = 0.0;
    double logAbs = 0.0;
    int sign = 1;
};

struct OutOfRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// log J_nu via the ascending series (scaled double-double accumulation).
// Requires z <= order/2, the only regime this code needs.
BesselLogValue log_bessel_j(double order, double z);

// log |Y_nu| with sign, via the reflection through J of +- order; orders
// within 1e-3 of an integer are Chebyshev-interpolated in the order
// variable (12 points, half-width 0.1). Requires z <= order/2.
BesselLogValue log_abs_bessel_y(double order, double z);

// log P-tilde of order -mu by the Bessel-J expansion in log form.
// Requires nu >= 10,000 and 0 < t < turning_point/100.
double logp_macdonald(const LegendreParams& p, double t);
// d/dt of the above (five-point finite differences on the smooth log).
double logp_macdonald_deriv(const LegendreParams& p, double t);

// log Q-tilde of order -mu: the Y-based expansion of the +mu function
// combined with the order connection, assembled so the secant pole cancels
// analytically.
double logq_macdonald(const LegendreParams& p, double t);

// Ungated variants used by table construction at regime seams.
double logp_macdonald_raw(double nu, double mu, double t);
double logq_macdonald_raw(double nu, double mu, double t);

// Double-double variants for seam comparisons below one ulp of the log.
DoubleDouble logp_macdonald_ddv(double nu, double mu, double t);
DoubleDouble logq_macdonald_ddv(double nu, double mu, double t);

}  // namespace aleg::macdonald
