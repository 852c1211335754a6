#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "aleg/phase.hpp"
#include "aleg/tables.hpp"

using namespace aleg;
using namespace aleg::tables;

namespace {
constexpr double kPi = 3.14159265358979323846;

// small profile for structural tests: reduced order and coarse partitions
TableProfile mini_profile() {
    TableProfile p;
    p.nuMax = 1000.0;
    p.order = 16;
    p.gridPoints = 17;
    p.xiPartition = {1e-3, 1e-2, 0.1};
    p.tauPartitionBig = {0.0, 0.5, 1.0};
    p.tauPartitionSmall = {0.0, 1.0};
    p.nuSmallPartition = {2.0, 10.0};
    return p;
}

const LegendreTable& mini_table() {
    static LegendreTable t = build_table(mini_profile());
    return t;
}
}  // namespace

TEST_CASE("table build produces sane structure") {
    const auto& t = mini_table();
    for (auto& reg : t.regions) {
        CHECK(reg.cells.size() ==
              static_cast<size_t>(reg.cells1()) * static_cast<size_t>(reg.cells2()));
        for (auto& cell : reg.cells) {
            REQUIRE(cell.uPartition.size() >= 2);
            CHECK(cell.uPartition.front() == 0.0);
            CHECK(cell.uPartition.back() == 1.0);
            CHECK(cell.prisms.size() == cell.uPartition.size() - 1);
            for (size_t i = 0; i + 1 < cell.uPartition.size(); ++i)
                CHECK(cell.uPartition[i] < cell.uPartition[i + 1]);
            for (auto& prism : cell.prisms) {
                CHECK(prism.first.coeff_count() > 0);
                CHECK(prism.second.coeff_count() > 0);
                // index structure monotone-consistent
                CHECK(prism.first.M <= static_cast<uint32_t>(prism.first.n));
                for (auto mi : prism.first.m) CHECK(mi <= static_cast<uint32_t>(prism.first.n));
            }
        }
    }
    CHECK(t.coefficient_count() > 0);
}

TEST_CASE("bit-exact serialization round trip") {
    const auto& t = mini_table();
    std::ostringstream s1;
    save(t, s1);
    std::string bytes1 = s1.str();
    std::istringstream in(bytes1);
    LegendreTable t2 = load(in);
    std::ostringstream s2;
    save(t2, s2);
    CHECK(bytes1 == s2.str());
    CHECK(t2.coefficient_count() == t.coefficient_count());

    SUBCASE("corrupted payload fails the checksum") {
        std::string bad = bytes1;
        bad[bad.size() / 2] ^= 0x40;
        std::istringstream binv(bad);
        CHECK_THROWS_AS(load(binv), TableError);
    }
    SUBCASE("truncated stream is rejected") {
        std::string cut = bytes1.substr(0, bytes1.size() / 3);
        std::istringstream binv(cut);
        CHECK_THROWS_AS(load(binv), TableError);
    }
    SUBCASE("bad magic is rejected") {
        std::string bad = bytes1;
        bad[0] = 'X';
        std::istringstream binv(bad);
        CHECK_THROWS_AS(load(binv), TableError);
    }
}

TEST_CASE("coverage: every in-domain point is claimed by exactly one region") {
    const auto& t = mini_table();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int it = 0; it < 20000; ++it) {
        double nu = 2.0 + (t.profile.nuMax - 2.0) * U(rng);
        double mu = nu * U(rng);
        double tt = 1e-6 + (kPi / 2 - 1e-6) * U(rng);
        double tStar = mu >= 1.0 ? std::asin(std::sqrt(mu * mu - 0.25) / (nu + 0.5))
                                 : std::pow(nu, -1.5);
        if (tt < tStar / 100.0) continue;  // series/asymptotic methods own this
        TableValues v = eval_table(t, nu, mu, tt);
        // the region is the unique one implied by the seam rules
        bool osc = tt >= tStar;
        int want = (osc ? 0 : 4) + (nu >= 10.0 ? 0 : 2) + (mu >= 1.0 ? 0 : 1);
        CHECK(static_cast<int>(v.region) == want);
        CHECK(std::isfinite(v.first));
        CHECK(std::isfinite(v.second));
        if (osc) CHECK(v.second > 0.0);  // alpha' positive
    }
}

TEST_CASE("table evaluation tracks fresh solves (mini profile)") {
    const auto& t = mini_table();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int it = 0; it < 12; ++it) {
        double nu = 12.0 + 800.0 * U(rng);
        double mu = 1.0 + (nu - 1.0) * U(rng);
        LegendreParams p{nu, mu};
        auto ph = phase::compute_phase(p);
        double tt = ph.tStar + (kPi / 2 - ph.tStar) * U(rng);
        TableValues v = eval_table(t, nu, mu, tt);
        // order-16 cells over decade-wide boxes: interpolation-grade check
        CHECK(v.second == doctest::Approx(ph.alpha_prime_at(tt)).epsilon(1e-5));
        CHECK(v.first == doctest::Approx(ph.alpha_at(tt)).epsilon(1e-5));
    }
}

TEST_CASE("desk-order single cell reproduces the phase module at 5e-13") {
    TableProfile p;
    p.nuMax = 1000.0;  // unused by this region
    p.xiPartition = {1e-3, 1e-2, 0.1};
    p.tauPartitionBig = {0.3, 0.6};
    p.tauPartitionSmall = {0.0, 1.0};
    p.nuSmallPartition = {2.0, 4.5};
    auto set = build_region(p, Region::O3);
    REQUIRE(set.cells.size() == 1);
    const Cell& cell = set.cells[0];

    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worstB = 0.0, worstA = 0.0;
    for (int it = 0; it < 50; ++it) {
        double nu = 2.0 + 2.5 * U(rng);
        double tau = 0.3 + 0.3 * U(rng);
        double mu = 1.0 + (nu - 1.0) * tau;
        LegendreParams prm{nu, mu};
        auto ph = phase::compute_phase(prm);
        double u = U(rng);
        double tt = ph.tStar + (kPi / 2 - ph.tStar) * u;
        int kc = 0;
        while (kc + 2 < static_cast<int>(cell.uPartition.size()) &&
               cell.uPartition[kc + 1] <= u)
            ++kc;
        double a = cheb::tri_eval_compressed(cell.prisms[kc].first, nu, tau, u) * nu;
        double b = cheb::tri_eval_compressed(cell.prisms[kc].second, nu, tau, u) * nu;
        worstA = std::max(worstA, std::fabs(a - ph.alpha_at(tt)) / std::fabs(ph.alpha_at(tt)));
        worstB = std::max(worstB,
                          std::fabs(b - ph.alpha_prime_at(tt)) / std::fabs(ph.alpha_prime_at(tt)));
    }
    CHECK(worstA <= 5e-13);
    CHECK(worstB <= 5e-13);

    // scaling identity at the right edge: A = alpha(pi/2)/nu at u = 1
    for (int it = 0; it < 20; ++it) {
        double nu = 2.0 + 2.5 * U(rng);
        double tau = 0.3 + 0.3 * U(rng);
        double mu = 1.0 + (nu - 1.0) * tau;
        double a = cheb::tri_eval_compressed(cell.prisms.back().first, nu, tau, 1.0) * nu;
        CHECK(a == doctest::Approx(2.0 * kPi + 0.5 * kPi * (nu - mu)).epsilon(1e-11));
    }
}

TEST_CASE("eval_table rejects out-of-domain points") {
    const auto& t = mini_table();
    CHECK_THROWS_AS(eval_table(t, 1.5, 0.5, 0.5), TableError);
    CHECK_THROWS_AS(eval_table(t, 2000.0, 10.0, 0.5), TableError);
    CHECK_THROWS_AS(eval_table(t, 100.0, 150.0, 0.5), TableError);
    CHECK_THROWS_AS(eval_table(t, 100.0, 50.0, 1e-9), TableError);
}
