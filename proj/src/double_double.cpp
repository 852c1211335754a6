#include "aleg/double_double.hpp"

#include <array>

namespace aleg::dd {

const DoubleDouble kPi{3.141592653589793116e+00, 1.224646799147353207e-16};
const DoubleDouble kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};

DoubleDouble sqrt(const DoubleDouble& a) {
    if (a.hi == 0.0) return {0.0, 0.0};
    if (a.hi < 0.0) throw std::domain_error("dd::sqrt of negative value");
    double x = std::sqrt(a.hi);
    // One Newton step on x = sqrt(a): x' = (x + a/x)/2 in dd.
    DoubleDouble r = div(a, x);
    DoubleDouble s = add(r, x);
    return mul(s, 0.5);
}

DoubleDouble exp(const DoubleDouble& a) {
    if (a.hi > 709.0) throw std::overflow_error("dd::exp overflow");
    if (a.hi < -745.0) return {0.0, 0.0};
    double k = std::nearbyint(a.hi / kLn2.hi);
    DoubleDouble r = sub(a, mul(kLn2, k));
    // |r| <= ln2/2; Taylor series in dd.
    DoubleDouble sum{1.0};
    DoubleDouble term{1.0};
    for (int i = 1; i <= 24; ++i) {
        term = div(mul(term, r), static_cast<double>(i));
        sum = add(sum, term);
        if (std::fabs(term.hi) < 1e-35 * std::fabs(sum.hi)) break;
    }
    return mul(sum, std::ldexp(1.0, static_cast<int>(k)));
}

DoubleDouble log(const DoubleDouble& a) {
    if (a.hi <= 0.0) throw std::domain_error("dd::log of nonpositive value");
    // Newton refinement of the double seed: l' = l + a*exp(-l) - 1.
    DoubleDouble l{std::log(a.hi)};
    for (int it = 0; it < 2; ++it) {
        DoubleDouble e = exp(neg(l));
        l = add(l, sub(mul(a, e), DoubleDouble{1.0}));
    }
    return l;
}

DoubleDouble atanh(const DoubleDouble& a) {
    if (std::fabs(a.hi) >= 1.0) throw std::domain_error("dd::atanh domain");
    DoubleDouble num = add(DoubleDouble{1.0}, a);
    DoubleDouble den = sub(1.0, a);
    return mul(log(div(num, den)), 0.5);
}

namespace {

// sin on [-pi/4, pi/4] by Taylor series.
DoubleDouble sin_taylor(const DoubleDouble& x) {
    DoubleDouble x2 = mul(x, x);
    DoubleDouble term = x;
    DoubleDouble sum = x;
    for (int i = 1; i <= 14; ++i) {
        term = mul(term, x2);
        term = div(term, -static_cast<double>((2 * i) * (2 * i + 1)));
        sum = add(sum, term);
        if (std::fabs(term.hi) < 1e-35 * std::fabs(sum.hi) + 1e-320) break;
    }
    return sum;
}

DoubleDouble cos_taylor(const DoubleDouble& x) {
    DoubleDouble x2 = mul(x, x);
    DoubleDouble term{1.0};
    DoubleDouble sum{1.0};
    for (int i = 1; i <= 14; ++i) {
        term = mul(term, x2);
        term = div(term, -static_cast<double>((2 * i - 1) * (2 * i)));
        sum = add(sum, term);
        if (std::fabs(term.hi) < 1e-35 * std::fabs(sum.hi) + 1e-320) break;
    }
    return sum;
}

}  // namespace

DoubleDouble sin(const DoubleDouble& a) {
    // Reduce by pi/2 quadrants; the arguments used here are O(1).
    DoubleDouble half_pi = mul(kPi, 0.5);
    double q = std::nearbyint(a.hi / half_pi.hi);
    DoubleDouble r = sub(a, mul(half_pi, q));
    int quad = static_cast<int>(q) & 3;
    if (quad < 0) quad += 4;
    switch (quad) {
        case 0: return sin_taylor(r);
        case 1: return cos_taylor(r);
        case 2: return neg(sin_taylor(r));
        default: return neg(cos_taylor(r));
    }
}

DoubleDouble cos(const DoubleDouble& a) {
    DoubleDouble half_pi = mul(kPi, 0.5);
    double q = std::nearbyint(a.hi / half_pi.hi);
    DoubleDouble r = sub(a, mul(half_pi, q));
    int quad = static_cast<int>(q) & 3;
    if (quad < 0) quad += 4;
    switch (quad) {
        case 0: return cos_taylor(r);
        case 1: return neg(sin_taylor(r));
        case 2: return neg(cos_taylor(r));
        default: return sin_taylor(r);
    }
}

DoubleDouble lgamma(const DoubleDouble& x) {
    if (x.hi <= 0.0) throw std::domain_error("dd::lgamma needs x > 0");
    // Shift to x >= 40, then Stirling.
    DoubleDouble shift{0.0};
    DoubleDouble z = x;
    while (z.hi < 40.0) {
        shift = add(shift, log(z));
        z = add(z, 1.0);
    }
    // B_{2n}/(2n(2n-1)) as exact integer ratios.
    static const std::array<double, 11> num = {1, -1, 1, -1, 5, -691, 7, -3617,
                                               43867, -174611, 854513};
    static const std::array<double, 11> den = {12, 360, 1260, 1680, 5940, 360360,
                                               1092, 122400, 244188, 125400, 63756};
    DoubleDouble lz = log(z);
    DoubleDouble res = mul(sub(z, DoubleDouble{0.5}), lz);
    res = sub(res, z);
    // 0.5*log(2*pi)
    res = add(res, mul(log(mul(kPi, 2.0)), 0.5));
    DoubleDouble z2 = mul(z, z);
    DoubleDouble p = div(DoubleDouble{1.0}, z);
    for (size_t i = 0; i < num.size(); ++i) {
        res = add(res, div(mul(p, num[i]), den[i]));
        p = div(p, z2);
        if (std::fabs(p.hi * num[i] / den[i]) < 1e-36 * std::fabs(res.hi)) break;
    }
    return sub(res, shift);
}

}  // namespace aleg::dd
