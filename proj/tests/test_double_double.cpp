#include "doctest.h"

#include <cmath>
#include <random>

#include "aleg/double_double.hpp"

using namespace aleg;

TEST_CASE("double-double defining property") {
    DoubleDouble a = DoubleDouble{1.0} + DoubleDouble{1e-20};
    DoubleDouble d = a - DoubleDouble{1.0};
    CHECK(d.to_double() == doctest::Approx(1e-20).epsilon(1e-14));
}

TEST_CASE("sqrt/log/exp self-inverse") {
    DoubleDouble s = dd::sqrt(DoubleDouble{2.0});
    DoubleDouble back = s * s - 2.0;
    CHECK(std::fabs(back.to_double()) <= 1e-30 * 2.0);

    DoubleDouble l = dd::log(dd::exp(DoubleDouble{1.0}));
    CHECK(std::fabs((l - 1.0).to_double()) <= 1e-28);

    DoubleDouble e = dd::exp(dd::log(DoubleDouble{123.456}));
    CHECK(std::fabs((e - 123.456).to_double()) <= 123.456 * 1e-28);
}

TEST_CASE("randomized error-free transformation properties") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> E(-30, 30);
    for (int it = 0; it < 100000; ++it) {
        double a = U(rng) * std::ldexp(1.0, E(rng));
        double b = U(rng) * std::ldexp(1.0, E(rng));
        auto s = dd::two_sum(a, b);
        // |lo| <= ulp(hi)/2 and hi = fl(a+b)
        CHECK(s.hi == a + b);
        CHECK(std::fabs(s.lo) <= std::fabs(s.hi) * 1.2e-16 + 1e-300);
        auto p = dd::two_prod(a, b);
        CHECK(p.hi == a * b);
    }
}

TEST_CASE("dd multiply/divide accuracy") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.2, 5.0);
    for (int it = 0; it < 1000; ++it) {
        double a = U(rng), b = U(rng);
        DoubleDouble q = DoubleDouble{a} / DoubleDouble{b};
        DoubleDouble r = q * DoubleDouble{b} - a;
        CHECK(std::fabs(r.to_double()) <= 1e-29 * a);
    }
}

TEST_CASE("dd trig and atanh") {
    DoubleDouble s = dd::sin(DoubleDouble{0.7});
    CHECK(s.to_double() == doctest::Approx(std::sin(0.7)).epsilon(1e-15));
    DoubleDouble c = dd::cos(DoubleDouble{2.9});
    CHECK(c.to_double() == doctest::Approx(std::cos(2.9)).epsilon(1e-15));
    // sin^2 + cos^2 = 1 to dd accuracy
    DoubleDouble one = s * s + dd::cos(DoubleDouble{0.7}) * dd::cos(DoubleDouble{0.7});
    CHECK(std::fabs((one - 1.0).to_double()) <= 1e-30);

    DoubleDouble at = dd::atanh(DoubleDouble{0.5});
    CHECK(at.to_double() == doctest::Approx(std::atanh(0.5)).epsilon(1e-15));
}

TEST_CASE("dd lgamma against known values") {
    // lgamma(0.5) = log(sqrt(pi))
    DoubleDouble l = dd::lgamma(DoubleDouble{0.5});
    CHECK(l.to_double() == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-15));
    // lgamma(10) = log(9!)
    DoubleDouble l10 = dd::lgamma(DoubleDouble{10.0});
    CHECK(l10.to_double() == doctest::Approx(std::log(362880.0)).epsilon(1e-15));
    // recurrence check: lgamma(x+1) - lgamma(x) = log(x); the difference
    // cancels, so the tolerance scales with |lgamma| itself
    for (double x : {1.25, 7.5, 40.0, 1234.5, 2.0e6}) {
        DoubleDouble lg1 = dd::lgamma(DoubleDouble{x + 1.0});
        DoubleDouble d = lg1 - dd::lgamma(DoubleDouble{x});
        CHECK(std::fabs((d - dd::log(DoubleDouble{x})).to_double()) <=
              1e-28 * (1.0 + std::fabs(lg1.to_double())));
    }
}
