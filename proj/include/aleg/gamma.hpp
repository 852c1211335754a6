// Log-gamma helpers: signed lgamma on the whole real line, the
// cancellation-free log Gamma-ratio for large degree/small order, and
// exactly-reduced trigonometric functions of pi*x.
#pragma once

#include "aleg/double_double.hpp"

namespace aleg {

struct SignedLog {
    double logAbs = 0.0;
    int sign = 1;  // 0 when the value is exactly zero
};

// log|Gamma(x)| and the sign of Gamma(x); sign = 0 at poles.
SignedLog lgamma_signed(double x);

// log(Gamma(nu - mu + 1) / Gamma(nu + mu + 1)) for 0 <= mu <= nu. Uses the
// direct difference (in double-double) where cancellation is mild and a
// digamma-series asymptotic form when nu is large and mu << nu.
double log_gamma_ratio(double nu, double mu);
DoubleDouble log_gamma_ratio_dd(double nu, double mu);

// cos(pi x), sin(pi x), tan(pi x) with exact range reduction of x.
double cospi(double x);
double sinpi(double x);
double tanpi(double x);

// Signed accumulation of terms given as (log-magnitude, sign); keeps a
// floating scale so that magnitudes far beyond double range can be summed.
class LogSum {
  public:
    void add(double logAbs, int sign);
    void add_value(double v);  // v given directly (moderate magnitude)
    SignedLog result() const;
    // log of |sum| assuming positivity; throws if sum <= 0.
    double log_positive() const;

  private:
    double scale_ = 0.0;  // accumulated in units of exp(scale_)
    double acc_ = 0.0;
    bool empty_ = true;
};

}  // namespace aleg
