// Double-double arithmetic: unevaluated pairs of IEEE doubles giving
// roughly 31 significant digits. Error-free transformations throughout.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aleg {

struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    DoubleDouble() = default;
    DoubleDouble(double x) : hi(x), lo(0.0) {}
    DoubleDouble(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
    explicit operator double() const { return to_double(); }
};

namespace dd {

inline DoubleDouble two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DoubleDouble renorm(double hi, double lo) { return quick_two_sum(hi, lo); }

inline DoubleDouble add(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble s = two_sum(a.hi, b.hi);
    DoubleDouble t = two_sum(a.lo, b.lo);
    double lo = s.lo + t.hi;
    DoubleDouble r = quick_two_sum(s.hi, lo);
    lo = r.lo + t.lo;
    return quick_two_sum(r.hi, lo);
}

inline DoubleDouble add(const DoubleDouble& a, double b) {
    DoubleDouble s = two_sum(a.hi, b);
    double lo = s.lo + a.lo;
    return quick_two_sum(s.hi, lo);
}

inline DoubleDouble sub(const DoubleDouble& a, const DoubleDouble& b) {
    return add(a, DoubleDouble{-b.hi, -b.lo});
}

inline DoubleDouble sub(double a, const DoubleDouble& b) {
    return add(DoubleDouble{a}, DoubleDouble{-b.hi, -b.lo});
}

inline DoubleDouble mul(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble p = two_prod(a.hi, b.hi);
    double lo = p.lo + (a.hi * b.lo + a.lo * b.hi);
    return quick_two_sum(p.hi, lo);
}

inline DoubleDouble mul(const DoubleDouble& a, double b) {
    DoubleDouble p = two_prod(a.hi, b);
    double lo = p.lo + a.lo * b;
    return quick_two_sum(p.hi, lo);
}

inline DoubleDouble div(const DoubleDouble& a, const DoubleDouble& b) {
    double q1 = a.hi / b.hi;
    DoubleDouble r = sub(a, mul(b, q1));
    double q2 = r.hi / b.hi;
    r = sub(r, mul(b, q2));
    double q3 = r.hi / b.hi;
    DoubleDouble q = quick_two_sum(q1, q2);
    return add(q, q3);
}

inline DoubleDouble div(const DoubleDouble& a, double b) { return div(a, DoubleDouble{b}); }
inline DoubleDouble div(double a, const DoubleDouble& b) { return div(DoubleDouble{a}, b); }

inline DoubleDouble neg(const DoubleDouble& a) { return {-a.hi, -a.lo}; }

inline bool less(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

DoubleDouble sqrt(const DoubleDouble& a);
DoubleDouble exp(const DoubleDouble& a);
DoubleDouble log(const DoubleDouble& a);
DoubleDouble atanh(const DoubleDouble& a);
DoubleDouble sin(const DoubleDouble& a);   // argument in [-2pi, 2pi]
DoubleDouble cos(const DoubleDouble& a);

// 2*pi, pi, pi/2, ln(2) as double-double constants.
extern const DoubleDouble kPi;
extern const DoubleDouble kLn2;

// lgamma to double-double accuracy for x >= 0.5 (Stirling after argument
// shift). Relative error around 1e-30 for moderate x.
DoubleDouble lgamma(const DoubleDouble& x);

}  // namespace dd

inline DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) { return dd::add(a, b); }
inline DoubleDouble operator+(const DoubleDouble& a, double b) { return dd::add(a, b); }
inline DoubleDouble operator+(double a, const DoubleDouble& b) { return dd::add(b, a); }
inline DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return dd::sub(a, b); }
inline DoubleDouble operator-(const DoubleDouble& a, double b) { return dd::add(a, -b); }
inline DoubleDouble operator-(double a, const DoubleDouble& b) { return dd::sub(a, b); }
inline DoubleDouble operator-(const DoubleDouble& a) { return dd::neg(a); }
inline DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) { return dd::mul(a, b); }
inline DoubleDouble operator*(const DoubleDouble& a, double b) { return dd::mul(a, b); }
inline DoubleDouble operator*(double a, const DoubleDouble& b) { return dd::mul(b, a); }
inline DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) { return dd::div(a, b); }
inline DoubleDouble operator/(const DoubleDouble& a, double b) { return dd::div(a, b); }
inline DoubleDouble operator/(double a, const DoubleDouble& b) { return dd::div(a, b); }

// Double-double mantissa with a separate binary exponent, for recurrences
// whose values overflow or underflow the double range.
struct ScaledDD {
    DoubleDouble m{0.0};
    long e2 = 0;

    static ScaledDD zero() { return {}; }
    static ScaledDD from(const DoubleDouble& v) {
        ScaledDD s{v, 0};
        s.normalize();
        return s;
    }
    static ScaledDD from_log(double logAbs, int sign) {
        if (sign == 0) return zero();
        ScaledDD s;
        s.e2 = static_cast<long>(std::floor(logAbs / 0.6931471805599453));
        s.m = dd::exp(DoubleDouble{logAbs} - dd::mul(dd::kLn2, static_cast<double>(s.e2)));
        if (sign < 0) s.m = dd::neg(s.m);
        s.normalize();
        return s;
    }
    static ScaledDD from_log_dd(const DoubleDouble& logAbs, int sign) {
        if (sign == 0) return zero();
        ScaledDD s;
        s.e2 = static_cast<long>(std::floor(logAbs.hi / 0.6931471805599453));
        s.m = dd::exp(dd::sub(logAbs, dd::mul(dd::kLn2, static_cast<double>(s.e2))));
        if (sign < 0) s.m = dd::neg(s.m);
        s.normalize();
        return s;
    }

    bool is_zero() const { return m.hi == 0.0; }
    int sign() const { return m.hi > 0.0 ? 1 : (m.hi < 0.0 ? -1 : 0); }

    void normalize() {
        if (m.hi == 0.0) {
            m.lo = 0.0;
            e2 = 0;
            return;
        }
        int ex;
        std::frexp(m.hi, &ex);
        if (ex != 0) {
            m.hi = std::ldexp(m.hi, -ex);
            m.lo = std::ldexp(m.lo, -ex);
            e2 += ex;
        }
    }

    ScaledDD mul(const DoubleDouble& v) const {
        ScaledDD r{dd::mul(m, v), e2};
        r.normalize();
        return r;
    }
    ScaledDD mul(const ScaledDD& v) const {
        ScaledDD r{dd::mul(m, v.m), e2 + v.e2};
        r.normalize();
        return r;
    }
    ScaledDD add(const ScaledDD& v) const {
        if (is_zero()) return v;
        if (v.is_zero()) return *this;
        const ScaledDD *big = this, *small = &v;
        if (v.e2 > e2) std::swap(big, small);
        long d = big->e2 - small->e2;
        if (d > 140) return *big;
        DoubleDouble sm{std::ldexp(small->m.hi, static_cast<int>(-d)),
                        std::ldexp(small->m.lo, static_cast<int>(-d))};
        ScaledDD r{dd::add(big->m, sm), big->e2};
        r.normalize();
        return r;
    }

    // log(|value|) to double accuracy.
    double log_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::fabs(m.to_double())) + static_cast<double>(e2) * 0.6931471805599453;
    }
    DoubleDouble log_abs_dd() const {
        if (is_zero()) throw std::domain_error("ScaledDD: log of zero");
        DoubleDouble am = m.hi < 0.0 ? dd::neg(m) : m;
        return dd::add(dd::log(am), dd::mul(dd::kLn2, static_cast<double>(e2)));
    }
    // value as double; overflows to +-inf, underflows to 0.
    double to_double() const {
        if (is_zero()) return 0.0;
        if (e2 > 1100) return m.hi > 0 ? HUGE_VAL : -HUGE_VAL;
        if (e2 < -1200) return 0.0;
        return std::ldexp(m.to_double(), static_cast<int>(e2));
    }
};

}  // namespace aleg
