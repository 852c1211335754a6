#include "aleg/macdonald.hpp"

#include <cmath>

#include "aleg/cheb.hpp"
#include "aleg/double_double.hpp"
#include "aleg/gamma.hpp"

namespace aleg::macdonald {

namespace {

constexpr double kLogPi = 1.1447298858494001741;

// Ascending J series for any real order; the argument is carried in
// double-double so that order-scaled log terms stay coherent with the rest
// of the expansion. Negative integer orders go through J_{-m} = (-1)^m J_m.
ScaledDD bessel_j_scaled(double a, const DoubleDouble& z) {
    if (!(z.hi > 0.0)) throw OutOfRegime("bessel j: need z > 0");
    double around = std::nearbyint(a);
    if (a == around && a < 0.0) {
        ScaledDD v = bessel_j_scaled(-a, z);
        if (static_cast<long>(-around) % 2 != 0) v.m = dd::neg(v.m);
        return v;
    }
    SignedLog g = lgamma_signed(a + 1.0);
    DoubleDouble z2 = dd::mul(z, 0.5);
    DoubleDouble logz2 = dd::log(z2);
    ScaledDD term =
        ScaledDD::from_log_dd(dd::sub(dd::mul(logz2, a), DoubleDouble{g.logAbs}), g.sign);
    ScaledDD sum = term;
    DoubleDouble x = dd::mul(z2, z2);
    for (int k = 1; k <= 400; ++k) {
        DoubleDouble den = dd::mul(dd::two_sum(a, static_cast<double>(k)),
                                   static_cast<double>(k));
        term = term.mul(dd::neg(dd::div(x, den)));
        if (term.is_zero()) break;
        sum = sum.add(term);
        if (!sum.is_zero() && term.log_abs() < sum.log_abs() - 75.0 &&
            static_cast<double>(k) * (a + k) > x.hi)
            break;
    }
    return sum;
}

ScaledDD bessel_y_scaled(double a, const DoubleDouble& z);

// Y for non-integer order via (J_a cos(a pi) - J_{-a}) / sin(a pi).
ScaledDD bessel_y_reflect(double a, const DoubleDouble& z) {
    double c = cospi(a), s = sinpi(a);
    ScaledDD ja = bessel_j_scaled(a, z);
    ScaledDD jneg = bessel_j_scaled(-a, z);
    ScaledDD num = ja.mul(DoubleDouble{c}).add(jneg.mul(DoubleDouble{-1.0}));
    return num.mul(DoubleDouble{1.0 / s});
}

ScaledDD bessel_y_scaled(double a, const DoubleDouble& z) {
    if (a < 0.0) {
        // Y_{-b} = cos(b pi) Y_b + sin(b pi) J_b
        double b = -a;
        double c = cospi(b), s = sinpi(b);
        ScaledDD yb = bessel_y_scaled(b, z);
        ScaledDD jb = bessel_j_scaled(b, z);
        return yb.mul(DoubleDouble{c}).add(jb.mul(DoubleDouble{s}));
    }
    double m = std::nearbyint(a);
    if (std::fabs(a - m) < 1e-3) {
        // Chebyshev interpolation in the order variable across the integer.
        // For m >= 3 the order-scaled leading part lgamma(b) + b log(2/z)
        // - log(pi) is split off so only an O(1) remainder is interpolated.
        auto grid = cheb::cheb_nodes(11, m - 0.1, m + 0.1);
        DoubleDouble log2z = dd::log(dd::div(DoubleDouble{2.0}, z));
        bool split = m >= 3.0;
        std::vector<double> vals(grid.nodes.size());
        int sgn = 0;
        for (size_t i = 0; i < vals.size(); ++i) {
            double b = grid.nodes[i];
            ScaledDD y = bessel_y_reflect(b, z);
            DoubleDouble ly = y.log_abs_dd();
            if (split) {
                DoubleDouble lead = dd::add(dd::lgamma(DoubleDouble{b}),
                                            dd::mul(log2z, b));
                lead = dd::add(lead, DoubleDouble{-kLogPi});
                ly = dd::sub(ly, lead);
            }
            vals[i] = ly.to_double();
            sgn = y.sign();
        }
        auto e = cheb::cheb_coeffs_1d(vals, grid);
        double r = cheb::cheb_eval_1d(e, a);
        if (!split) return ScaledDD::from_log(r, sgn);
        DoubleDouble lead = dd::add(dd::lgamma(DoubleDouble{a}), dd::mul(log2z, a));
        lead = dd::add(lead, DoubleDouble{-kLogPi});
        return ScaledDD::from_log_dd(dd::add(DoubleDouble{r}, lead), sgn);
    }
    return bessel_y_reflect(a, z);
}

double turning_point_of(double nu, double mu) {
    if (mu >= 1.0) return std::asin(std::sqrt(mu * mu - 0.25) / (nu + 0.5));
    return std::pow(nu, -1.5);
}

// Expansion weights: W[k] multiplies the Bessel factor k orders away from
// the base order (J_{mu+k} for P, the reflected pieces at order mu-k for Q).
void expansion_weights(double eta, double s2, double W[9]) {
    for (int i = 0; i < 9; ++i) W[i] = 0.0;
    W[0] = 1.0;
    W[3] += s2 * eta / 6.0;
    W[2] += -s2;
    W[1] += s2 / (2.0 * eta);
    double s4 = s2 * s2;
    W[6] += s4 * eta * eta / 72.0;
    W[5] += -s4 * 11.0 * eta / 30.0;
    W[4] += s4 * 31.0 / 12.0;
    W[3] += -s4 * 29.0 / (6.0 * eta);
    W[2] += s4 * 9.0 / (8.0 * eta * eta);
    double s6 = s4 * s2;
    W[2] += s6 * 75.0 / (16.0 * eta * eta * eta);
    W[3] += -s6 * 751.0 / (24.0 * eta * eta);
    W[4] += s6 * 1381.0 / (48.0 * eta);
    W[5] += -s6 * 1513.0 / 180.0;
    W[6] += s6 * 4943.0 * eta / 5040.0;
    W[7] += -s6 * 17.0 * eta * eta / 360.0;
    W[8] += s6 * eta * eta * eta / 1296.0;
}

struct Frame {
    DoubleDouble lam, sinT, cosHalf, eta;
    double etaD, s2;
};

Frame make_frame(double nu, double t) {
    Frame f;
    f.lam = dd::two_sum(nu, 0.5);
    DoubleDouble th = dd::mul(DoubleDouble{t}, 0.5);
    DoubleDouble sh = dd::sin(th);
    f.cosHalf = dd::cos(th);
    f.sinT = dd::mul(dd::mul(sh, f.cosHalf), 2.0);
    f.eta = dd::mul(dd::mul(f.lam, sh), 2.0);
    f.etaD = f.eta.to_double();
    f.s2 = dd::mul(sh, sh).to_double();
    return f;
}

DoubleDouble logp_macdonald_dd(double nu, double mu, double t) {
    Frame f = make_frame(nu, t);
    ScaledDD jmu = bessel_j_scaled(mu, f.eta);
    DoubleDouble ljmu = jmu.log_abs_dd();
    double W[9];
    expansion_weights(f.etaD, f.s2, W);
    double corr = 0.0;
    for (int k = 0; k <= 8; ++k) {
        if (W[k] == 0.0) continue;
        if (k == 0) {
            corr += W[0];
            continue;
        }
        double lr = dd::sub(bessel_j_scaled(mu + k, f.eta).log_abs_dd(), ljmu).to_double();
        corr += W[k] * std::exp(lr);
    }
    if (!(corr > 0.0)) throw OutOfRegime("logp_macdonald: correction sum not positive");
    DoubleDouble res = dd::mul(log_gamma_ratio_dd(nu, mu), -0.5);
    res = dd::add(res, dd::mul(dd::log(f.lam), 0.5));
    res = dd::add(res, dd::mul(dd::log(f.sinT), 0.5));
    res = dd::sub(res, dd::mul(dd::log(dd::mul(f.lam, f.cosHalf)), mu));
    res = dd::add(res, ljmu);
    res = dd::add(res, DoubleDouble{std::log(corr)});
    return res;
}

}  // namespace

BesselLogValue log_bessel_j(double order, double z) {
    if (order < 0.0) throw OutOfRegime("log_bessel_j: order must be >= 0");
    if (!(z > 0.0) || z > order / 2.0)
        throw OutOfRegime("log_bessel_j: outside the z <= order/2 regime");
    ScaledDD v = bessel_j_scaled(order, DoubleDouble{z});
    return {order, z, v.log_abs(), v.sign()};
}

BesselLogValue log_abs_bessel_y(double order, double z) {
    if (order < 0.0) throw OutOfRegime("log_abs_bessel_y: order must be >= 0");
    if (!(z > 0.0) || z > order / 2.0)
        throw OutOfRegime("log_abs_bessel_y: outside the z <= order/2 regime");
    ScaledDD v = bessel_y_scaled(order, DoubleDouble{z});
    return {order, z, v.log_abs(), v.sign()};
}

double logp_macdonald_raw(double nu, double mu, double t) {
    return logp_macdonald_dd(nu, mu, t).to_double();
}

DoubleDouble logp_macdonald_ddv(double nu, double mu, double t) {
    return logp_macdonald_dd(nu, mu, t);
}

DoubleDouble logq_macdonald_ddv(double nu, double mu, double t) {
    Frame f = make_frame(nu, t);
    double W[9];
    expansion_weights(f.etaD, f.s2, W);
    DoubleDouble logG = dd::mul(log_gamma_ratio_dd(nu, mu), 0.5);
    logG = dd::add(logG, dd::mul(dd::log(f.lam), 0.5));
    logG = dd::add(logG, dd::mul(dd::log(f.sinT), 0.5));
    logG = dd::add(logG, dd::mul(dd::log(dd::mul(f.lam, f.cosHalf)), mu));
    // SY = sum W_k (-1)^k Y_{mu-k}, SJ likewise with J; these arise from
    // writing Y_{-mu+k} = (-1)^k [cos(mu pi) Y_{mu-k} + sin(mu pi) J_{mu-k}],
    // after which sec(mu pi) of the order connection cancels analytically.
    ScaledDD SY = ScaledDD::zero(), SJ = ScaledDD::zero();
    for (int k = 0; k <= 8; ++k) {
        if (W[k] == 0.0) continue;
        double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        SY = SY.add(bessel_y_scaled(mu - k, f.eta).mul(DoubleDouble{sgn * W[k]}));
        SJ = SJ.add(bessel_j_scaled(mu - k, f.eta).mul(DoubleDouble{sgn * W[k]}));
    }
    ScaledDD G = ScaledDD::from_log_dd(logG, 1);
    // Q- = -G SY + tan(mu pi) (Pneg - G SJ)
    ScaledDD T1 = G.mul(SY);
    T1.m = dd::neg(T1.m);
    double tp = tanpi(mu);
    ScaledDD q = T1;
    if (tp != 0.0) {
        ScaledDD pneg = ScaledDD::from_log_dd(logp_macdonald_dd(nu, mu, t), 1);
        ScaledDD bracket = pneg.add(G.mul(SJ).mul(DoubleDouble{-1.0}));
        q = T1.add(bracket.mul(DoubleDouble{tp}));
    }
    if (q.sign() <= 0) throw OutOfRegime("logq_macdonald: result not positive");
    return q.log_abs_dd();
}

double logq_macdonald_raw(double nu, double mu, double t) {
    return logq_macdonald_ddv(nu, mu, t).to_double();
}

double logp_macdonald(const LegendreParams& p, double t) {
    if (p.nu < 1e4) throw OutOfRegime("logp_macdonald: nu below 10,000");
    if (!(t > 0.0) || t >= turning_point_of(p.nu, p.mu) / 100.0)
        throw OutOfRegime("logp_macdonald: t outside (0, t*/100)");
    return logp_macdonald_raw(p.nu, p.mu, t);
}

double logp_macdonald_deriv(const LegendreParams& p, double t) {
    double h = 1e-3 * t;
    double f1 = logp_macdonald_raw(p.nu, p.mu, t + h);
    double f2 = logp_macdonald_raw(p.nu, p.mu, t + 2 * h);
    double fm1 = logp_macdonald_raw(p.nu, p.mu, t - h);
    double fm2 = logp_macdonald_raw(p.nu, p.mu, t - 2 * h);
    return (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

double logq_macdonald(const LegendreParams& p, double t) {
    if (p.nu < 1e4) throw OutOfRegime("logq_macdonald: nu below 10,000");
    if (!(t > 0.0) || t >= turning_point_of(p.nu, p.mu) / 100.0)
        throw OutOfRegime("logq_macdonald: t outside (0, t*/100)");
    return logq_macdonald_raw(p.nu, p.mu, t);
}

}  // namespace aleg::macdonald
