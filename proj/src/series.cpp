#include "aleg/series.hpp"

#include <cmath>

#include "aleg/cheb.hpp"
#include "aleg/double_double.hpp"

namespace aleg::series {

namespace {

struct SumResult {
    ScaledDD S;    // sum of terms
    ScaledDD Sd;   // sum of n * term_n (for the t-derivative)
};

// Inner sum of the order -mu series, normalized so the n = 0 term is 1:
// term ratio = -x (nu+n)(nu-n+1) / ((mu+n) n), x = sin^2(t/2).
SumResult sum_neg_order(double nu, double mu, const DoubleDouble& x, const SeriesConfig& cfg) {
    ScaledDD term = ScaledDD::from(DoubleDouble{1.0});
    SumResult r{term, ScaledDD::zero()};
    int small_streak = 0;
    for (int n = 1; n <= cfg.maxTerms; ++n) {
        DoubleDouble num = dd::mul(x, dd::mul(dd::two_sum(nu, static_cast<double>(n)),
                                              dd::two_sum(nu, 1.0 - n)));
        DoubleDouble den = dd::mul(dd::two_sum(mu, static_cast<double>(n)),
                                   static_cast<double>(n));
        term = term.mul(dd::neg(dd::div(num, den)));
        if (term.is_zero()) return r;  // integer nu: series terminates
        r.S = r.S.add(term);
        r.Sd = r.Sd.add(term.mul(DoubleDouble{static_cast<double>(n)}));
        bool small = term.log_abs() < std::log(cfg.termTol) + r.S.log_abs();
        small_streak = small ? small_streak + 1 : 0;
        if (small_streak >= 2) return r;
    }
    throw SeriesError("series did not converge within maxTerms");
}

// Inner sum of the order +mu series including the 1/Gamma(n - mu + 1)
// factors (so the n = 0 term is 1/Gamma(1-mu), zero at integer mu > 0).
SumResult sum_pos_order(double nu, double mu, const DoubleDouble& x, const SeriesConfig& cfg) {
    SumResult r{ScaledDD::zero(), ScaledDD::zero()};
    ScaledDD term;
    int n0;
    double mround = std::nearbyint(mu);
    if (mu == mround && mround >= 0.0) {
        // first m terms vanish; launch at n = m
        int m = static_cast<int>(mround);
        ScaledDD xm = ScaledDD::from(DoubleDouble{1.0});
        for (int i = 0; i < m; ++i) xm = xm.mul(x);
        double pre = std::lgamma(nu + m + 1.0) - std::lgamma(nu - m + 1.0) -
                     std::lgamma(static_cast<double>(m) + 1.0);
        term = ScaledDD::from_log(pre, (m % 2 == 0) ? 1 : -1).mul(xm);
        n0 = m;
    } else {
        SignedLog g = lgamma_signed(1.0 - mu);
        term = ScaledDD::from_log(-g.logAbs, g.sign);
        n0 = 0;
    }
    r.S = term;
    if (n0 > 0) r.Sd = term.mul(DoubleDouble{static_cast<double>(n0)});
    int small_streak = 0;
    for (int n = n0 + 1; n <= cfg.maxTerms + n0; ++n) {
        DoubleDouble num = dd::mul(x, dd::mul(dd::two_sum(nu, static_cast<double>(n)),
                                              nu - n + 1.0));
        DoubleDouble den = dd::mul(dd::two_sum(static_cast<double>(n), -mu),
                                   static_cast<double>(n));
        term = term.mul(dd::neg(dd::div(num, den)));
        if (term.is_zero()) return r;
        r.S = r.S.add(term);
        r.Sd = r.Sd.add(term.mul(DoubleDouble{static_cast<double>(n)}));
        if (!r.S.is_zero()) {
            bool small = term.log_abs() < std::log(cfg.termTol) + r.S.log_abs();
            small_streak = small ? small_streak + 1 : 0;
            if (small_streak >= 2) return r;
        }
    }
    throw SeriesError("positive-order series did not converge within maxTerms");
}

// log prefactor of the order -mu series in double-double:
// 1/2[log lambda - lgr] + 1/2 log sin t + mu log tan(t/2) - lgamma(mu+1),
// lgr = lgamma(nu-mu+1) - lgamma(nu+mu+1).
DoubleDouble prefactor_neg(double nu, double mu, double t) {
    DoubleDouble lam{nu + 0.5};
    DoubleDouble half{0.5};
    DoubleDouble st = dd::sin(DoubleDouble{t});
    DoubleDouble th = dd::mul(DoubleDouble{t}, 0.5);
    DoubleDouble tanh2 = dd::div(dd::sin(th), dd::cos(th));
    DoubleDouble lgr;
    if (mu >= 0.0 && mu <= nu) {
        lgr = log_gamma_ratio_dd(nu, mu);
    } else {
        // interpolation fringe (mu slightly negative or slightly above nu)
        lgr = dd::sub(dd::lgamma(DoubleDouble{nu - mu + 1.0}),
                      dd::lgamma(DoubleDouble{nu + mu + 1.0}));
    }
    DoubleDouble res = dd::mul(dd::sub(dd::log(lam), lgr), half.hi);
    res = dd::add(res, dd::mul(dd::log(st), 0.5));
    res = dd::add(res, dd::mul(dd::log(tanh2), mu));
    res = dd::sub(res, dd::lgamma(DoubleDouble{mu + 1.0}));
    return res;
}

// log prefactor of the order +mu series (without the 1/Gamma(n-mu+1) pieces,
// which live inside the sum): 1/2[log lambda + lgr] + 1/2 log sin t
// - mu log tan(t/2).
DoubleDouble prefactor_pos(double nu, double mu, double t) {
    DoubleDouble lam{nu + 0.5};
    DoubleDouble st = dd::sin(DoubleDouble{t});
    DoubleDouble th = dd::mul(DoubleDouble{t}, 0.5);
    DoubleDouble tanh2 = dd::div(dd::sin(th), dd::cos(th));
    DoubleDouble lgr;
    if (mu >= 0.0 && mu <= nu) {
        lgr = log_gamma_ratio_dd(nu, mu);
    } else {
        lgr = dd::sub(dd::lgamma(DoubleDouble{nu - mu + 1.0}),
                      dd::lgamma(DoubleDouble{nu + mu + 1.0}));
    }
    DoubleDouble res = dd::mul(dd::add(dd::log(lam), lgr), 0.5);
    res = dd::add(res, dd::mul(dd::log(st), 0.5));
    res = dd::sub(res, dd::mul(dd::log(tanh2), mu));
    return res;
}

DoubleDouble x_of_t(double t) {
    DoubleDouble s = dd::sin(dd::mul(DoubleDouble{t}, 0.5));
    return dd::mul(s, s);
}

double saturating_exp(double logAbs, int sign) {
    if (sign == 0) return 0.0;
    if (logAbs > 709.0) return sign > 0 ? HUGE_VAL : -HUGE_VAL;
    if (logAbs < -745.0) return 0.0;
    return sign * std::exp(logAbs);
}

// raw (validation-free) entry points used by the interpolation fringes
double p_series_raw(double nu, double mu, double t, const SeriesConfig& cfg) {
    auto sum = sum_neg_order(nu, mu, x_of_t(t), cfg);
    ScaledDD full = sum.S.mul(ScaledDD::from_log_dd(prefactor_neg(nu, mu, t), 1));
    return full.to_double();
}

ScaledDD p_pos_scaled(double nu, double mu, double t, const SeriesConfig& cfg) {
    auto sum = sum_pos_order(nu, mu, x_of_t(t), cfg);
    return sum.S.mul(ScaledDD::from_log_dd(prefactor_pos(nu, mu, t), 1));
}

double q_connection_direct(double nu, double mu, double t, const SeriesConfig& cfg) {
    // csc(mu pi) Ppos - cot(mu pi) Pneg, assembled in scaled double-double
    auto pos = p_pos_scaled(nu, mu, t, cfg);
    auto sumn = sum_neg_order(nu, mu, x_of_t(t), cfg);
    ScaledDD neg = sumn.S.mul(ScaledDD::from_log_dd(prefactor_neg(nu, mu, t), 1));
    double sp = sinpi(mu), cp = cospi(mu);
    ScaledDD q = pos.mul(DoubleDouble{1.0 / sp}).add(neg.mul(DoubleDouble{-cp / sp}));
    return q.to_double();
}

DoubleDouble logq_connection_direct_dd(double nu, double mu, double t,
                                       const SeriesConfig& cfg) {
    auto sumn = sum_neg_order(nu, mu, x_of_t(t), cfg);
    if (sumn.S.sign() <= 0) throw SeriesError("logq_connection: P series not positive");
    DoubleDouble lp = dd::add(prefactor_neg(nu, mu, t), sumn.S.log_abs_dd());
    auto pos = p_pos_scaled(nu, mu, t, cfg);
    if (pos.is_zero()) throw SeriesError("logq_connection: positive-order P vanished");
    DoubleDouble la = pos.log_abs_dd();
    int sa = pos.sign();
    double sp = sinpi(mu), cp = cospi(mu);
    double D = dd::sub(la, lp).to_double();
    if (D > 40.0) {
        // Q = csc sa e^{la} (1 - cos(mu pi) e^{-D} / sa)
        double lead = sa / sp;
        if (!(lead > 0.0)) throw SeriesError("logq_connection: Q is not positive here");
        DoubleDouble r = dd::add(la, dd::log(DoubleDouble{lead}));
        return dd::add(r, DoubleDouble{std::log1p(-cp * std::exp(-D) / sa)});
    }
    // Q = e^{lp} (csc sa e^{D} - cot)
    double v = sa * std::exp(D) / sp - cp / sp;
    if (!(v > 0.0)) throw SeriesError("logq_connection: Q is not positive here");
    return dd::add(lp, dd::log(DoubleDouble{v}));
}

double logq_connection_direct(double nu, double mu, double t, const SeriesConfig& cfg) {
    return logq_connection_direct_dd(nu, mu, t, cfg).to_double();
}

std::pair<double, double> logq_connection_deriv_direct(double nu, double mu, double t,
                                                       const SeriesConfig& cfg) {
    auto sumn = sum_neg_order(nu, mu, x_of_t(t), cfg);
    if (sumn.S.sign() <= 0) throw SeriesError("logq_connection: P series not positive");
    DoubleDouble lpdd = dd::add(prefactor_neg(nu, mu, t), sumn.S.log_abs_dd());
    double lp = lpdd.to_double();
    double cot_t2 = std::cos(0.5 * t) / std::sin(0.5 * t);
    double gneg;
    {
        double ratio = 0.0;
        if (!sumn.Sd.is_zero())
            ratio = sumn.Sd.sign() * sumn.S.sign() * std::exp(sumn.Sd.log_abs() - sumn.S.log_abs());
        gneg = 0.5 / std::tan(t) + mu / std::sin(t) + ratio * cot_t2;
    }
    auto sump = sum_pos_order(nu, mu, x_of_t(t), cfg);
    ScaledDD pos = sump.S.mul(ScaledDD::from_log_dd(prefactor_pos(nu, mu, t), 1));
    double la = pos.log_abs();
    int sa = pos.sign();
    double gpos;
    {
        double ratio = 0.0;
        if (!sump.Sd.is_zero())
            ratio = sump.Sd.sign() * sump.S.sign() * std::exp(sump.Sd.log_abs() - sump.S.log_abs());
        gpos = 0.5 / std::tan(t) - mu / std::sin(t) + ratio * cot_t2;
    }
    double sp = sinpi(mu), cp = cospi(mu);
    LogSum ls;
    ls.add(la - lp - std::log(std::fabs(sp)), sa * (sp > 0 ? 1 : -1));
    if (cp != 0.0) ls.add(std::log(std::fabs(cp / sp)), (cp / sp) > 0 ? -1 : 1);
    double logq = lp + ls.log_positive();
    // dlogQ = [csc sa e^{la} gpos - cot e^{lp} gneg] / e^{logq}
    double t1 = sa / sp * std::exp(la - logq) * gpos;
    double t2 = (cp / sp) * std::exp(lp - logq) * gneg;
    return {logq, t1 - t2};
}

}  // namespace

double interp_in_mu(const std::function<double(double)>& g, double center, double mu,
                    double halfWidth, int points) {
    auto grid = cheb::cheb_nodes(points - 1, center - halfWidth, center + halfWidth);
    std::vector<double> vals(grid.nodes.size());
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = g(grid.nodes[i]);
    auto e = cheb::cheb_coeffs_1d(vals, grid);
    return cheb::cheb_eval_1d(e, mu);
}

double p_series(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    if (!(t > 0.0) || t > 1.5707963267948967)
        throw SeriesError("p_series: t outside (0, pi/2]");
    return p_series_raw(p.nu, p.mu, t, cfg);
}

double p_series_posorder(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    if (!(t > 0.0) || t > 1.5707963267948967)
        throw SeriesError("p_series_posorder: t outside (0, pi/2]");
    return p_pos_scaled(p.nu, p.mu, t, cfg).to_double();
}

double logp_series(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    return logp_series_dd(p, t, cfg).to_double();
}

DoubleDouble logp_series_dd(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    auto sum = sum_neg_order(p.nu, p.mu, x_of_t(t), cfg);
    if (sum.S.sign() <= 0) throw SeriesError("logp_series: inner sum not positive");
    return dd::add(prefactor_neg(p.nu, p.mu, t), sum.S.log_abs_dd());
}

DoubleDouble logq_connection_dd(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    return logq_connection_direct_dd(p.nu, p.mu, t, cfg);
}

std::pair<double, double> logp_series_deriv(const LegendreParams& p, double t,
                                            const SeriesConfig& cfg) {
    auto sum = sum_neg_order(p.nu, p.mu, x_of_t(t), cfg);
    if (sum.S.sign() <= 0) throw SeriesError("logp_series: inner sum not positive");
    double logp = dd::add(prefactor_neg(p.nu, p.mu, t), sum.S.log_abs_dd()).to_double();
    double ratio = 0.0;
    if (!sum.Sd.is_zero())
        ratio = sum.Sd.sign() * sum.S.sign() * std::exp(sum.Sd.log_abs() - sum.S.log_abs());
    double cot_t2 = std::cos(0.5 * t) / std::sin(0.5 * t);
    double dlogp = 0.5 / std::tan(t) + p.mu / std::sin(t) + ratio * cot_t2;
    return {logp, dlogp};
}

SignedLog logabsp_posorder(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    auto s = p_pos_scaled(p.nu, p.mu, t, cfg);
    if (s.is_zero()) return {-HUGE_VAL, 0};
    return {s.log_abs(), s.sign()};
}

std::pair<SignedLog, double> logabsp_posorder_deriv(const LegendreParams& p, double t,
                                                    const SeriesConfig& cfg) {
    auto sum = sum_pos_order(p.nu, p.mu, x_of_t(t), cfg);
    ScaledDD s = sum.S.mul(ScaledDD::from_log_dd(prefactor_pos(p.nu, p.mu, t), 1));
    if (s.is_zero()) return {{-HUGE_VAL, 0}, 0.0};
    double ratio = 0.0;
    if (!sum.Sd.is_zero())
        ratio = sum.Sd.sign() * sum.S.sign() * std::exp(sum.Sd.log_abs() - sum.S.log_abs());
    double cot_t2 = std::cos(0.5 * t) / std::sin(0.5 * t);
    double dlog = 0.5 / std::tan(t) - p.mu / std::sin(t) + ratio * cot_t2;
    return {{s.log_abs(), s.sign()}, dlog};
}

double q_connection(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    double m = std::nearbyint(p.mu);
    if (m >= 0.0 && std::fabs(p.mu - m) < cfg.muIntegerWindow) {
        return interp_in_mu(
            [&](double muPrime) { return q_connection_direct(p.nu, muPrime, t, cfg); }, m, p.mu,
            cfg.muInterpHalfWidth, cfg.muInterpPoints);
    }
    return q_connection_direct(p.nu, p.mu, t, cfg);
}

double logq_connection(const LegendreParams& p, double t, const SeriesConfig& cfg) {
    double m = std::nearbyint(p.mu);
    if (m >= 0.0 && std::fabs(p.mu - m) < cfg.muIntegerWindow) {
        return interp_in_mu(
            [&](double muPrime) { return logq_connection_direct(p.nu, muPrime, t, cfg); }, m, p.mu,
            cfg.muInterpHalfWidth, cfg.muInterpPoints);
    }
    return logq_connection_direct(p.nu, p.mu, t, cfg);
}

std::pair<double, double> logq_connection_deriv(const LegendreParams& p, double t,
                                                const SeriesConfig& cfg) {
    double m = std::nearbyint(p.mu);
    if (m >= 0.0 && std::fabs(p.mu - m) < cfg.muIntegerWindow) {
        double lq = interp_in_mu(
            [&](double mp) { return logq_connection_deriv_direct(p.nu, mp, t, cfg).first; }, m,
            p.mu, cfg.muInterpHalfWidth, cfg.muInterpPoints);
        double dq = interp_in_mu(
            [&](double mp) { return logq_connection_deriv_direct(p.nu, mp, t, cfg).second; }, m,
            p.mu, cfg.muInterpHalfWidth, cfg.muInterpPoints);
        return {lq, dq};
    }
    return logq_connection_deriv_direct(p.nu, p.mu, t, cfg);
}

double connect_qq(double mu, double logAbsQpos, int signQpos, double logPneg) {
    double sp = sinpi(mu), cp = cospi(mu);
    if (cp == 0.0) throw SeriesError("connect_qq: half-integer order");
    LogSum ls;
    // sec * Qpos + tan * Pneg
    ls.add(logAbsQpos - std::log(std::fabs(cp)), signQpos * (cp > 0 ? 1 : -1));
    if (sp != 0.0)
        ls.add(logPneg + std::log(std::fabs(sp / cp)), (sp / cp) > 0 ? 1 : -1);
    try {
        return ls.log_positive();
    } catch (const std::domain_error&) {
        throw SeriesError("connect_qq: result not positive");
    }
}

std::pair<double, double> reflect(const LegendreParams& p, double pAtT, double qAtT) {
    double d = p.nu - p.mu;
    double c = cospi(d), s = sinpi(d);
    return {c * pAtT - s * qAtT, -c * qAtT - s * pAtT};
}

std::pair<double, double> p_series_deriv(const LegendreParams& p, double t,
                                         const SeriesConfig& cfg) {
    auto sum = sum_neg_order(p.nu, p.mu, x_of_t(t), cfg);
    ScaledDD pref = ScaledDD::from_log_dd(prefactor_neg(p.nu, p.mu, t), 1);
    double val = sum.S.mul(pref).to_double();
    double cot_t2 = std::cos(0.5 * t) / std::sin(0.5 * t);
    double dL = 0.5 / std::tan(t) + p.mu / std::sin(t);
    // dP = pref (S dL + Sd cot(t/2))
    ScaledDD dsum = sum.S.mul(DoubleDouble{dL}).add(sum.Sd.mul(DoubleDouble{cot_t2}));
    return {val, dsum.mul(pref).to_double()};
}

std::pair<double, double> q_connection_deriv(const LegendreParams& p, double t,
                                             const SeriesConfig& cfg) {
    auto direct = [&](double mu) -> std::pair<double, double> {
        auto sumn = sum_neg_order(p.nu, mu, x_of_t(t), cfg);
        auto sump = sum_pos_order(p.nu, mu, x_of_t(t), cfg);
        ScaledDD prefn = ScaledDD::from_log_dd(prefactor_neg(p.nu, mu, t), 1);
        ScaledDD prefp = ScaledDD::from_log_dd(prefactor_pos(p.nu, mu, t), 1);
        double cot_t2 = std::cos(0.5 * t) / std::sin(0.5 * t);
        double dLn = 0.5 / std::tan(t) + mu / std::sin(t);
        double dLp = 0.5 / std::tan(t) - mu / std::sin(t);
        ScaledDD pn = sumn.S.mul(prefn);
        ScaledDD pp = sump.S.mul(prefp);
        ScaledDD dpn = sumn.S.mul(DoubleDouble{dLn}).add(sumn.Sd.mul(DoubleDouble{cot_t2})).mul(prefn);
        ScaledDD dpp = sump.S.mul(DoubleDouble{dLp}).add(sump.Sd.mul(DoubleDouble{cot_t2})).mul(prefp);
        double sp = sinpi(mu), cp = cospi(mu);
        ScaledDD q = pp.mul(DoubleDouble{1.0 / sp}).add(pn.mul(DoubleDouble{-cp / sp}));
        ScaledDD dq = dpp.mul(DoubleDouble{1.0 / sp}).add(dpn.mul(DoubleDouble{-cp / sp}));
        return {q.to_double(), dq.to_double()};
    };
    double m = std::nearbyint(p.mu);
    if (m >= 0.0 && std::fabs(p.mu - m) < cfg.muIntegerWindow) {
        double q = interp_in_mu([&](double mp) { return direct(mp).first; }, m, p.mu,
                                cfg.muInterpHalfWidth, cfg.muInterpPoints);
        double dq = interp_in_mu([&](double mp) { return direct(mp).second; }, m, p.mu,
                                 cfg.muInterpHalfWidth, cfg.muInterpPoints);
        return {q, dq};
    }
    return direct(p.mu);
}

}  // namespace aleg::series
