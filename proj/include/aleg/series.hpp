// Series expansions of the normalized associated Legendre functions and the
// connection formulas between orders, including the mu-interpolation used
// near integer orders and the pi-t reflection identities.
#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include "aleg/gamma.hpp"
#include "aleg/params.hpp"

namespace aleg::series {

struct SeriesConfig {
    int maxTerms = 200;
    double termTol = 1e-17;
    double muIntegerWindow = 1e-3;
    double muInterpHalfWidth = 0.1;
    int muInterpPoints = 12;  // even, so no node lands on the integer
};

struct SeriesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// P-tilde of order -mu via the hypergeometric-type series. The sum is
// accumulated in double-double; large-t evaluations of high degree cancel
// heavily and would be meaningless in plain double.
double p_series(const LegendreParams& p, double t, const SeriesConfig& cfg = {});

// P-tilde of order +mu (value form; small parameters only).
double p_series_posorder(const LegendreParams& p, double t, const SeriesConfig& cfg = {});

// log P-tilde of order -mu (valid while the inner sum stays positive).
double logp_series(const LegendreParams& p, double t, const SeriesConfig& cfg = {});
// Double-double variant (for seam comparisons whose tolerance sits below
// one ulp of the log itself).
DoubleDouble logp_series_dd(const LegendreParams& p, double t, const SeriesConfig& cfg = {});
// Double-double log Q-tilde via the direct connection path (no integer
// interpolation; callers keep mu away from integers).
DoubleDouble logq_connection_dd(const LegendreParams& p, double t, const SeriesConfig& cfg = {});
// Same plus d/dt log P-tilde by term-wise differentiation.
std::pair<double, double> logp_series_deriv(const LegendreParams& p, double t,
                                            const SeriesConfig& cfg = {});

// log |P-tilde of order +mu| with sign; scaled accumulation, safe for large mu.
SignedLog logabsp_posorder(const LegendreParams& p, double t, const SeriesConfig& cfg = {});
// Same plus the t-derivative of the log.
std::pair<SignedLog, double> logabsp_posorder_deriv(const LegendreParams& p, double t,
                                                    const SeriesConfig& cfg = {});

// Q-tilde of order -mu via the connection formula
// csc(mu pi) Ppos - cot(mu pi) Pneg, Chebyshev-interpolated in mu near
// integer orders.
double q_connection(const LegendreParams& p, double t, const SeriesConfig& cfg = {});

// log Q-tilde of order -mu via the log-safe form of the same connection.
double logq_connection(const LegendreParams& p, double t, const SeriesConfig& cfg = {});
// Same plus d/dt log Q-tilde.
std::pair<double, double> logq_connection_deriv(const LegendreParams& p, double t,
                                                const SeriesConfig& cfg = {});

// log of sec(mu pi) Qpos + tan(mu pi) Pneg given the ingredient logs
// (order +mu Q and order -mu P). Result must be positive.
double connect_qq(double mu, double logAbsQpos, int signQpos, double logPneg);

// values of P-tilde and Q-tilde at pi - t from the values at t.
std::pair<double, double> reflect(const LegendreParams& p, double pAtT, double qAtT);

// P-tilde and its t-derivative (value form), for Wronskian cross-checks.
std::pair<double, double> p_series_deriv(const LegendreParams& p, double t,
                                         const SeriesConfig& cfg = {});
std::pair<double, double> q_connection_deriv(const LegendreParams& p, double t,
                                             const SeriesConfig& cfg = {});

// Chebyshev interpolation in mu over [m - halfWidth, m + halfWidth]; used by
// the connection formulas near integer mu and reusable by other modules.
double interp_in_mu(const std::function<double(double)>& g, double center, double mu,
                    double halfWidth, int points);

}  // namespace aleg::series
