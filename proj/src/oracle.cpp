#include "aleg/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace aleg::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

// A chain value group shares one binary exponent; members are rescaled
// together so linear recurrences stay coherent.
struct Pair {
    DoubleDouble a, b;  // consecutive chain values
    long e = 0;

    void shift(int k) {
        a.hi = std::ldexp(a.hi, k);
        a.lo = std::ldexp(a.lo, k);
        b.hi = std::ldexp(b.hi, k);
        b.lo = std::ldexp(b.lo, k);
        e -= k;
    }
    void rescale() {
        double m = std::max(std::fabs(a.hi), std::fabs(b.hi));
        if (m == 0.0) return;
        if (m > 1.6e60) shift(-200);
        else if (m < 6.2e-61) shift(200);
    }
};

struct Context {
    double nu, mu;
    DoubleDouble x;      // cos t
    DoubleDouble s;      // sin t
    DoubleDouble rs;     // sqrt(sin t)
    DoubleDouble lam;    // nu + 1/2
};

DoubleDouble dd_int(long v) { return DoubleDouble{static_cast<double>(v)}; }

// A_l = sqrt((2l-1)(2l+1) / ((l-mu)(l+mu))) for the normalized degree
// recurrence Pb_l = A_l (x Pb_{l-1} - Pb_{l-2} / A_{l-1}).
DoubleDouble coeff_A(long l, long mu) {
    DoubleDouble num = dd_int((2 * l - 1)) * dd_int(2 * l + 1);
    DoubleDouble den = dd_int(l - mu) * dd_int(l + mu);
    return dd::sqrt(num / den);
}

// Advance the normalized degree chain from (v_{l-1}, v_l) at l to the target
// degree, keeping the last two values.
void run_degree_chain(const Context& c, long mu, long lStart, long lEnd, Pair& p) {
    DoubleDouble Aprev = (lStart >= mu + 1) ? coeff_A(lStart, mu) : DoubleDouble{1.0};
    for (long l = lStart + 1; l <= lEnd; ++l) {
        DoubleDouble A = coeff_A(l, mu);
        DoubleDouble next = A * (c.x * p.b - p.a / Aprev);
        p.a = p.b;
        p.b = next;
        Aprev = A;
        p.rescale();
    }
}

// P-tilde seeds at degrees mu and mu+1 (log form, scaled).
Pair p_seed(const Context& c, long mu) {
    DoubleDouble lg = dd::mul(dd::log(dd_int(2 * mu + 1) * 0.5), 0.5);
    lg = lg + dd::mul(dd::lgamma(dd_int(2 * mu + 1)), 0.5);
    lg = lg - dd::mul(dd::kLn2, static_cast<double>(mu));
    lg = lg - dd::lgamma(dd_int(mu + 1));
    lg = lg + dd::mul(dd::log(c.s), static_cast<double>(mu) + 0.5);
    ScaledDD seed = ScaledDD::from_log_dd(lg, 1);
    Pair p;
    p.e = seed.e2;
    p.a = seed.m;
    p.b = dd::sqrt(dd_int(2 * mu + 3)) * c.x * seed.m;
    p.rescale();
    return p;
}

struct Group {
    DoubleDouble atNu;      // value at degree nu
    DoubleDouble atNuP1;    // value at degree nu+1
    long e = 0;
};

// P-tilde at degrees nu and nu+1 for fixed integer order mu.
Group p_values(const Context& c, long nu, long mu) {
    Pair p = p_seed(c, mu);
    Group g;
    if (nu == mu) {
        g.atNu = p.a;
        g.atNuP1 = p.b;
        g.e = p.e;
        return g;
    }
    run_degree_chain(c, mu, mu + 1, nu + 1, p);
    g.atNu = p.a;
    g.atNuP1 = p.b;
    g.e = p.e;
    return g;
}

// Q-tilde of order -1 at degree n from the order-0 values at n-1 and n:
// Qt^{-1}_n = n / sin t * sqrt((n+1/2)/(n(n+1)))
//             * [Q0_{n-1}/sqrt(n-1/2) - x Q0_n/sqrt(n+1/2)]
DoubleDouble q_order1(const Context& c, long n, const DoubleDouble& q0nm1,
                      const DoubleDouble& q0n) {
    DoubleDouble lamN = dd::two_sum(static_cast<double>(n), 0.5);
    DoubleDouble bracket = q0nm1 / dd::sqrt(lamN - 1.0) - c.x * q0n / dd::sqrt(lamN);
    DoubleDouble pref = dd_int(n) / c.s * dd::sqrt(lamN / (dd_int(n) * dd_int(n + 1)));
    return pref * bracket;
}

// Raise the order chain: Qb^{-(m+1)} from Qb^{-m}, Qb^{-(m-1)} at fixed
// degree n.
void run_order_chain(const Context& c, long n, long mEnd, Pair& q) {
    // q.a = order -(m-1), q.b = order -m, starting at m = 1
    for (long m = 1; m < mEnd; ++m) {
        DoubleDouble c1 = dd_int(2 * m) * c.x /
                          (c.s * dd::sqrt(dd_int(n + m + 1) * dd_int(n - m)));
        DoubleDouble c2 =
            dd::sqrt((dd_int(n + m) * dd_int(n - m + 1)) / (dd_int(n + m + 1) * dd_int(n - m)));
        DoubleDouble next = c1 * q.b - c2 * q.a;
        q.a = q.b;
        q.b = next;
        q.rescale();
    }
}

// Q-tilde at order -mu for degrees nu and nu+1.
Group q_values(const Context& c, long nu, long mu) {
    // order-0 chain from degrees 0,1 up to nu+1
    DoubleDouble at = dd::atanh(c.x);
    DoubleDouble twoOverPi = dd::div(DoubleDouble{2.0}, dd::kPi);
    Pair q0;
    q0.a = dd::sqrt(DoubleDouble{0.5}) * at;                    // degree 0
    q0.b = dd::sqrt(DoubleDouble{1.5}) * (c.x * at - 1.0);      // degree 1
    q0.a = q0.a * twoOverPi * c.rs;
    q0.b = q0.b * twoOverPi * c.rs;
    Group g;
    if (nu == 0) {
        // need degrees 0 and 1 only
        g.atNu = q0.a;
        g.atNuP1 = q0.b;
        g.e = 0;
    }
    DoubleDouble q0_nm1, q0_n, q0_np1;
    if (nu == 0) {
        q0_n = q0.a;
        q0_np1 = q0.b;
        q0_nm1 = DoubleDouble{0.0};  // unused
    } else {
        run_degree_chain(c, 0, 1, nu + 1, q0);
        q0_n = q0.a;
        q0_np1 = q0.b;
        // rerun is avoided by keeping the value one step earlier
        // (recover degree nu-1 from the recurrence inverted once)
        DoubleDouble A = coeff_A(nu + 1, 0);
        DoubleDouble Aprev = coeff_A(nu, 0);
        // q0_np1 = A (x q0_n - q0_nm1/Aprev)  =>  q0_nm1 = Aprev (x q0_n - q0_np1/A)
        q0_nm1 = Aprev * (c.x * q0_n - q0_np1 / A);
        g.e = q0.e;
    }
    if (mu == 0) {
        g.atNu = q0_n;
        g.atNuP1 = q0_np1;
        if (nu > 0) g.e = q0.e;
        return g;
    }
    // order -1 at degrees nu and nu+1, then raise the order at both degrees
    Pair qn;
    qn.a = q0_n;
    qn.b = q_order1(c, nu, q0_nm1, q0_n);
    qn.e = (nu == 0) ? 0 : q0.e;
    run_order_chain(c, nu, mu, qn);
    Pair qn1;
    qn1.a = q0_np1;
    qn1.b = q_order1(c, nu + 1, q0_n, q0_np1);
    qn1.e = qn.e == 0 && nu == 0 ? 0 : ((nu == 0) ? 0 : q0.e);
    qn1.e = (nu == 0) ? 0 : q0.e;
    run_order_chain(c, nu + 1, mu, qn1);
    // align exponents of the two groups
    long d = qn.e - qn1.e;
    if (d != 0) {
        qn1.b.hi = std::ldexp(qn1.b.hi, static_cast<int>(-d));
        qn1.b.lo = std::ldexp(qn1.b.lo, static_cast<int>(-d));
        qn1.e += d;
    }
    g.atNu = qn.b;
    g.atNuP1 = qn1.b;
    g.e = qn.e;
    return g;
}

// d/dt of the normalized function from its values at degrees nu, nu+1:
// [D_nu f_{nu+1} - (nu+1/2) x f_nu] / sin t,
// D_nu = sqrt(((nu+1)^2 - mu^2)(2nu+1)/(2nu+3)).
DoubleDouble deriv_from_pair(const Context& c, long nu, long mu, const DoubleDouble& fnu,
                             const DoubleDouble& fnup1) {
    DoubleDouble D = dd::sqrt(dd_int(nu + 1 - mu) * dd_int(nu + 1 + mu) * dd_int(2 * nu + 1) /
                              dd_int(2 * nu + 3));
    return (D * fnup1 - c.lam * c.x * fnu) / c.s;
}

double sat(const DoubleDouble& v, long e) {
    if (v.hi == 0.0) return 0.0;
    if (e > 1060) return v.hi > 0 ? HUGE_VAL : -HUGE_VAL;
    if (e < -1100) return 0.0;
    return std::ldexp(v.to_double(), static_cast<int>(e));
}

double log_of(const DoubleDouble& v, long e) {
    DoubleDouble av = v.hi < 0 ? dd::neg(v) : v;
    return dd::add(dd::log(av), dd::mul(dd::kLn2, static_cast<double>(e))).to_double();
}

}  // namespace

OracleResult recurrence_pq(long nuInt, long muInt, double t) {
    if (nuInt < 0 || muInt < 0 || muInt > nuInt)
        throw std::domain_error("recurrence_pq: need 0 <= mu <= nu");
    if (!(t > 0.0) || !(t < kPi)) throw std::domain_error("recurrence_pq: t outside (0, pi)");
    Context c;
    c.nu = static_cast<double>(nuInt);
    c.mu = static_cast<double>(muInt);
    c.x = dd::cos(DoubleDouble{t});
    c.s = dd::sin(DoubleDouble{t});
    c.rs = dd::sqrt(c.s);
    c.lam = dd::two_sum(c.nu, 0.5);

    Group P = p_values(c, nuInt, muInt);
    Group Q = q_values(c, nuInt, muInt);
    DoubleDouble dP = deriv_from_pair(c, nuInt, muInt, P.atNu, P.atNuP1);
    DoubleDouble dQ = deriv_from_pair(c, nuInt, muInt, Q.atNu, Q.atNuP1);

    OracleResult r;
    r.pTilde = sat(P.atNu, P.e);
    r.qTilde = sat(Q.atNu, Q.e);
    r.dpTilde = sat(dP, P.e);
    r.dqTilde = sat(dQ, Q.e);
    r.logP = log_of(P.atNu, P.e);
    r.logQ = log_of(Q.atNu, Q.e);
    r.signP = P.atNu.hi > 0 ? 1 : (P.atNu.hi < 0 ? -1 : 0);
    r.signQ = Q.atNu.hi > 0 ? 1 : (Q.atNu.hi < 0 ? -1 : 0);

    // Wronskian gate: P dQ - dP Q = -(2/pi)(nu + 1/2), checked in
    // double-double (one double rounding already exceeds the gate)
    DoubleDouble w = P.atNu * dQ - dP * Q.atNu;
    ScaledDD ws{w, P.e + Q.e};
    ws.normalize();
    ScaledDD ratio = ws.mul(dd::div(dd::kPi, c.lam * -2.0));
    double resid;
    if (ratio.e2 > 60 || ratio.e2 < -60) {
        resid = 1.0;
    } else {
        resid = std::fabs(dd::add(DoubleDouble{std::ldexp(ratio.m.hi, (int)ratio.e2),
                                               std::ldexp(ratio.m.lo, (int)ratio.e2)},
                                  -1.0)
                              .to_double());
    }
    r.wronskianResidual = resid;
    r.lowConfidence = !(r.wronskianResidual <= 1e-20);

    // alpha' = (2/pi) lambda / (P^2 + Q^2)
    ScaledDD p2{P.atNu * P.atNu, 2 * P.e};
    p2.normalize();
    ScaledDD q2{Q.atNu * Q.atNu, 2 * Q.e};
    q2.normalize();
    ScaledDD sum = p2.add(q2);
    // divide in the scaled representation to keep double-double accuracy
    ScaledDD apn = ScaledDD::from(c.lam * dd::div(DoubleDouble{2.0}, dd::kPi));
    ScaledDD ap{dd::div(apn.m, sum.m), apn.e2 - sum.e2};
    ap.normalize();
    r.alphaPrime = ap.to_double();
    return r;
}

double alpha_prime_oracle(long nuInt, long muInt, double t) {
    OracleResult r = recurrence_pq(nuInt, muInt, t);
    if (r.lowConfidence) throw std::runtime_error("alpha_prime_oracle: low confidence");
    return r.alphaPrime;
}

}  // namespace aleg::oracle
