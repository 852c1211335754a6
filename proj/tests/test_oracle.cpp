#include "doctest.h"

#include <cmath>
#include <random>

#include "aleg/oracle.hpp"
#include "aleg/series.hpp"

using namespace aleg;
using namespace aleg::oracle;

namespace {
constexpr double kPi = 3.14159265358979323846;
// 45-digit references
constexpr double kP_0_0 = 0.65803700647624623041;
constexpr double kQ_0_0 = 0.23011498352185009672;
constexpr double kP_9_4 = 0.73949081439354202831;
constexpr double kdP_9_4 = -4.1196482411731250549;
constexpr double kQ_9_4 = -0.52384509424745662649;
constexpr double kdQ_9_4 = -5.2601469019170659468;
constexpr double kTs_100_80 = 0.92066506375217888497;
constexpr double kLogP_100_80 = -36.675144588257319866;
constexpr double kLogQ_100_80 = 35.133812363651464559;
constexpr double kP_1000_300 = 0.39709498353693267712;
constexpr double kQ_1000_300 = 0.72364442969312395831;
constexpr double kAp_1000_300 = 934.8236802591697571;
}  // namespace

TEST_CASE("oracle closed-form values") {
    auto r = recurrence_pq(0, 0, kPi / 3);
    CHECK(r.pTilde == doctest::Approx(kP_0_0).epsilon(1e-15));
    CHECK(r.qTilde == doctest::Approx(kQ_0_0).epsilon(1e-15));
    CHECK_FALSE(r.lowConfidence);

    auto r11 = recurrence_pq(1, 1, kPi / 2);
    CHECK(r11.pTilde == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
    CHECK_FALSE(r11.lowConfidence);
}

TEST_CASE("oracle values and derivatives at (9,4,0.7)") {
    auto r = recurrence_pq(9, 4, 0.7);
    CHECK(r.pTilde == doctest::Approx(kP_9_4).epsilon(1e-14));
    CHECK(r.qTilde == doctest::Approx(kQ_9_4).epsilon(1e-14));
    CHECK(r.dpTilde == doctest::Approx(kdP_9_4).epsilon(1e-14));
    CHECK(r.dqTilde == doctest::Approx(kdQ_9_4).epsilon(1e-14));
    CHECK(r.wronskianResidual <= 1e-20);
}

TEST_CASE("oracle deep nonoscillatory logs") {
    auto r = recurrence_pq(100, 80, kTs_100_80 / 2);
    CHECK(r.logP == doctest::Approx(kLogP_100_80).epsilon(1e-14));
    CHECK(r.logQ == doctest::Approx(kLogQ_100_80).epsilon(1e-14));
    CHECK(r.signP == 1);
    CHECK(r.signQ == 1);
    CHECK_FALSE(r.lowConfidence);
}

TEST_CASE("oracle at large degree with Wronskian self-check") {
    auto r = recurrence_pq(1000, 300, 1.0);
    CHECK(r.pTilde == doctest::Approx(kP_1000_300).epsilon(1e-13));
    CHECK(r.qTilde == doctest::Approx(kQ_1000_300).epsilon(1e-13));
    CHECK(r.wronskianResidual <= 1e-20);
    CHECK(alpha_prime_oracle(1000, 300, 1.0) ==
          doctest::Approx(kAp_1000_300).epsilon(1e-13));
}

TEST_CASE("alpha_prime closed forms") {
    CHECK(alpha_prime_oracle(0, 0, kPi / 2) == doctest::Approx(2.0 / kPi).epsilon(1e-14));
    CHECK(alpha_prime_oracle(1, 0, kPi / 2) == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("oracle agrees with the series at small integer parameters") {
    std::mt19937_64 rng(20240);
    std::uniform_real_distribution<double> U(0.05, kPi / 2);
    for (long nu : {0L, 1L, 2L, 5L, 13L, 30L}) {
        for (long mu = 0; mu <= nu; mu += std::max<long>(1, nu / 3)) {
            for (int it = 0; it < 20; ++it) {
                double t = U(rng);
                auto r = recurrence_pq(nu, mu, t);
                REQUIRE_FALSE(r.lowConfidence);
                double ps = series::p_series(
                    {static_cast<double>(nu), static_cast<double>(mu)}, t);
                CHECK(std::fabs(r.pTilde - ps) <=
                      1e-13 * std::max(1.0, std::fabs(r.pTilde)));
                double qs = series::q_connection(
                    {static_cast<double>(nu), static_cast<double>(mu)}, t);
                CHECK(std::fabs(r.qTilde - qs) <=
                      1e-12 * std::max(1.0, std::fabs(r.qTilde)));
            }
        }
    }
}

TEST_CASE("oracle handles large order underflow in log form") {
    // P underflows the double format deep in the nonoscillatory region but
    // the log stays finite and the gate still passes
    auto r = recurrence_pq(2000, 1900, 0.05);
    CHECK(r.pTilde == 0.0);  // saturated
    CHECK(std::isfinite(r.logP));
    CHECK(r.logP < -800.0);
    CHECK(std::isinf(r.qTilde));
    CHECK(std::isfinite(r.logQ));
    CHECK_FALSE(r.lowConfidence);
    // phase-identity value still finite
    CHECK(r.alphaPrime >= 0.0);
}

TEST_CASE("oracle rejects bad input") {
    CHECK_THROWS(recurrence_pq(3, 5, 0.5));
    CHECK_THROWS(recurrence_pq(3, 2, 0.0));
}
