#include "aleg/phase.hpp"

#include <cmath>

#include "aleg/gamma.hpp"
#include "aleg/macdonald.hpp"
#include "aleg/ode_solver.hpp"
#include "aleg/series.hpp"

namespace aleg::phase {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;

double coefficient_q(double lam, double etaSq, double t) {
    double s = std::sin(t);
    return lam * lam - etaSq / (s * s);
}

}  // namespace

double turning_point(const LegendreParams& p) {
    if (p.mu >= 1.0) return std::asin(std::sqrt(p.mu * p.mu - 0.25) / (p.nu + 0.5));
    return std::pow(p.nu, -1.5);
}

std::pair<double, double> alpha_terminal(const LegendreParams& p) {
    // double lgamma would cost ~|lgamma| eps of absolute error, far too much
    // at large degree; the combination is assembled in double-double
    DoubleDouble a = dd::lgamma(DoubleDouble{0.5 * (p.nu - p.mu) + 1.0});
    a = a + dd::lgamma(DoubleDouble{0.5 * (p.nu + p.mu) + 1.0});
    a = a - dd::lgamma(DoubleDouble{0.5 * (p.nu - p.mu) + 0.5});
    a = a - dd::lgamma(DoubleDouble{0.5 * (p.nu + p.mu) + 0.5});
    return {2.0 * dd::exp(a).to_double(), 0.0};
}

DoubleDouble PhaseFunction::alpha_at_dd(double t) const {
    int i = alpha.locate(t);
    double a = alpha.breakpoints[i], b = alpha.breakpoints[i + 1];
    // evaluate the within-piece change relative to the left edge in double
    // and add it to the exact left-edge value
    auto c = alpha.piece_coeffs(i);
    std::vector<double> shifted(c.begin(), c.end());
    shifted[0] = 0.0;
    cheb::PiecewiseExpansion one;
    one.n = alpha.n;
    one.breakpoints = {a, b};
    one.coeffs = std::move(shifted);
    double rest = cheb::cheb_eval_piecewise(one, t);
    double at_left = cheb::cheb_eval_piecewise(one, a);
    return alphaLeftDD[i] + (rest - at_left);
}

PhaseFunction compute_phase(const LegendreParams& p, double epsilon, int k) {
    return compute_phase_domain(p, turning_point(p), epsilon, k);
}

PhaseFunction compute_phase_domain(const LegendreParams& p, double tStar, double epsilon,
                                   int k) {
    if (p.nu < 2.0) throw PhaseError("compute_phase: nu below the tabulated regime");
    if (!(epsilon >= 1e-16 && epsilon <= 1e-10))
        throw PhaseError("compute_phase: epsilon outside [1e-16, 1e-10]");
    double lam = p.lambda();
    double etaSq = p.eta_sq();
    // For 1/2 < mu < 1 the domain dips below the true turning point; the
    // backward march through that shallow stretch amplifies roundoff only
    // polynomially in nu (eta stays below sqrt(3)/2) and keeps alpha and
    // alpha' exactly consistent, so no special casing is needed.

    auto [apEnd, appEnd] = alpha_terminal(p);
    // Theorem-1 form rearranged for the solver: w'' = (3/2) w'^2/w
    // + 2 w (q - w^2). With this sign the perturbation modes around the
    // nonoscillatory solution stay bounded (oscillatory), so the backward
    // march is stable.
    OdeProblem prob;
    prob.f = [lam, etaSq](double t, double w, double wp) {
        double q = coefficient_q(lam, etaSq, t);
        return 1.5 * wp * wp / w + 2.0 * w * (q - w * w);
    };
    prob.df_dy = [lam, etaSq](double t, double w, double wp) {
        double q = coefficient_q(lam, etaSq, t);
        return -1.5 * (wp / w) * (wp / w) + 2.0 * q - 6.0 * w * w;
    };
    prob.df_dyp = [](double, double w, double wp) { return 3.0 * wp / w; };
    prob.f_scale = [lam, etaSq](double t, double w, double wp) {
        double q = coefficient_q(lam, etaSq, t);
        return 1.5 * wp * wp / w + 2.0 * w * (w * w + std::fabs(q));
    };
    prob.a = tStar;
    prob.b = kHalfPi;
    prob.direction = OdeDirection::Backward;
    prob.y0 = apEnd;
    prob.yp0 = appEnd;
    prob.k = k;
    prob.epsilon = epsilon;
    prob.y_valid = [](double w) { return w > 0.0; };
    OdeSolution sol;
    try {
        sol = solve_ode(prob);
    } catch (const SolverFailure& e) {
        throw PhaseError(std::string("compute_phase: ") + e.what());
    }

    PhaseFunction ph;
    ph.params = p;
    ph.tStar = tStar;
    ph.alphaPrime = sol.y;
    ph.alphaPrimePrime = sol.yp;
    ph.alphaPrime3 = sol.ypp;
    ph.alpha = cheb::spectral_antiderivative_dd(
        sol.y, kHalfPi, DoubleDouble{2.0 * kPi} + dd::mul(dd::kPi, 0.5 * (p.nu - p.mu)),
        &ph.alphaLeftDD);
    return ph;
}

double find_t0(const PhaseFunction& ph) {
    double target = 7.0 * kPi / 4.0;
    double lo = ph.tStar, hi = kHalfPi;
    double alo = ph.alpha_at(lo);
    if (alo >= target) return lo;
    // Newton with a bisection bracket; alpha is monotone increasing
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        double a = ph.alpha_at(t);
        double ap = ph.alpha_prime_at(t);
        double step = (a - target) / ap;
        if (a > target) hi = t;
        else lo = t;
        double tn = t - step;
        if (!(tn > lo) || !(tn < hi)) tn = 0.5 * (lo + hi);
        if (std::fabs(tn - t) <= 1e-15 * t) {
            t = tn;
            break;
        }
        t = tn;
    }
    return t;
}

namespace {

LogSolutions riccati_solve(const LegendreParams& p, double a, double b, OdeDirection dir,
                           double y0, double yp0, double epsilon, int k, double offset) {
    double lam = p.lambda();
    double etaSq = p.eta_sq();
    OdeProblem prob;
    prob.f = [lam, etaSq](double t, double, double rp) {
        return -coefficient_q(lam, etaSq, t) - rp * rp;
    };
    prob.df_dy = [](double, double, double) { return 0.0; };
    prob.df_dyp = [](double, double, double rp) { return -2.0 * rp; };
    prob.f_scale = [lam, etaSq](double t, double, double rp) {
        return std::fabs(coefficient_q(lam, etaSq, t)) + rp * rp;
    };
    prob.a = a;
    prob.b = b;
    prob.direction = dir;
    prob.y0 = y0;
    prob.yp0 = yp0;
    prob.k = k;
    prob.epsilon = epsilon;
    OdeSolution sol;
    try {
        sol = solve_ode(prob);
    } catch (const SolverFailure& e) {
        throw PhaseError(std::string("riccati: ") + e.what());
    }
    LogSolutions ls;
    ls.params = p;
    double tStar = turning_point(p);
    ls.tLo = tStar / 100.0;
    ls.tHi = tStar;
    ls.value = cheb::restrict_piecewise(sol.y, ls.tLo, ls.tHi);
    ls.deriv = cheb::restrict_piecewise(sol.yp, ls.tLo, ls.tHi);
    ls.deriv2 = cheb::restrict_piecewise(sol.ypp, ls.tLo, ls.tHi);
    // apply the +-nu offset to the stored value expansion
    for (int i = 0; i < ls.value.pieces(); ++i)
        ls.value.coeffs[static_cast<size_t>(i) * (ls.value.n + 1)] += 2.0 * offset;
    return ls;
}

}  // namespace

LogSolutions compute_logq(const LegendreParams& p, const PhaseFunction& ph, double epsilon,
                          int k) {
    if (p.mu < 1.0) throw PhaseError("compute_logq: requires mu >= 1");
    double t0 = find_t0(ph);
    double a0 = ph.alpha_at(t0);
    double ap0 = ph.alpha_prime_at(t0);
    double app0 = ph.alpha_pp_at(t0);
    double sinA = std::sin(a0);
    if (!(sinA < 0.0)) throw PhaseError("compute_logq: Q not positive at t0");
    double lam = p.lambda();
    double r0 = 0.5 * std::log(2.0 * lam / kPi) + std::log(-sinA) - 0.5 * std::log(ap0);
    double rp0 = ap0 * (std::cos(a0) / sinA) - 0.5 * app0 / ap0;
    return riccati_solve(p, ph.tStar / 100.0, t0, OdeDirection::Backward, r0, rp0, epsilon, k,
                         p.nu);
}

LogSolutions compute_logp(const LegendreParams& p, double epsilon, int k) {
    if (p.mu < 1.0) throw PhaseError("compute_logp: requires mu >= 1");
    double tStar = turning_point(p);
    double ta = tStar / 100.0;
    double r0, rp0;
    if (p.nu <= 1e4) {
        auto [lp, dlp] = series::logp_series_deriv(p, ta);
        r0 = lp;
        rp0 = dlp;
    } else {
        r0 = macdonald::logp_macdonald_raw(p.nu, p.mu, ta);
        rp0 = macdonald::logp_macdonald_deriv(p, ta);
    }
    return riccati_solve(p, ta, tStar, OdeDirection::Forward, r0, rp0, epsilon, k, -p.nu);
}

double kummer_residual(const PhaseFunction& ph) {
    double lam = ph.params.lambda();
    double etaSq = ph.params.eta_sq();
    double worst = 0.0;
    int n = ph.alphaPrime.n;
    auto unit = cheb::cheb_nodes(n, -1.0, 1.0);
    for (int i = 0; i < ph.alphaPrime.pieces(); ++i) {
        double a = ph.alphaPrime.breakpoints[i], b = ph.alphaPrime.breakpoints[i + 1];
        for (int j = 1; j < n; ++j) {
            double t = 0.5 * (a + b) + 0.5 * (b - a) * unit.nodes[j];
            double w = cheb::cheb_eval_piecewise(ph.alphaPrime, t);
            double wp = cheb::cheb_eval_piecewise(ph.alphaPrimePrime, t);
            double wpp = cheb::cheb_eval_piecewise(ph.alphaPrime3, t);
            double q = coefficient_q(lam, etaSq, t);
            double resid = q - w * w - 0.5 * wpp / w + 0.75 * (wp / w) * (wp / w);
            worst = std::max(worst, std::fabs(resid));
        }
    }
    return worst / (lam * lam);
}

double riccati_residual(const LogSolutions& ls, double offset) {
    double lam = ls.params.lambda();
    double etaSq = ls.params.eta_sq();
    double worst = 0.0;
    int n = ls.value.n;
    auto unit = cheb::cheb_nodes(n, -1.0, 1.0);
    for (int i = 0; i < ls.value.pieces(); ++i) {
        double a = ls.value.breakpoints[i], b = ls.value.breakpoints[i + 1];
        for (int j = 1; j < n; ++j) {
            double t = 0.5 * (a + b) + 0.5 * (b - a) * unit.nodes[j];
            double rp = cheb::cheb_eval_piecewise(ls.deriv, t);
            double rpp = cheb::cheb_eval_piecewise(ls.deriv2, t);
            double q = coefficient_q(lam, etaSq, t);
            worst = std::max(worst, std::fabs(rpp + rp * rp + q));
        }
    }
    (void)offset;
    return worst / (lam * lam);
}

}  // namespace aleg::phase
