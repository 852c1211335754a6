#include "aleg/tables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "aleg/phase.hpp"
#include "aleg/series.hpp"

namespace aleg::tables {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;

std::vector<double> geometric_nodes(double lo, double hi, int cells) {
    std::vector<double> v(cells + 1);
    double r = std::log(hi / lo) / cells;
    for (int i = 0; i <= cells; ++i) v[i] = lo * std::exp(r * i);
    v.front() = lo;
    v.back() = hi;
    return v;
}

struct RegionGeometry {
    bool oscillatory;
    bool bigNu;   // axis1 is xi = 1/nu over [1/nuMax, 1/10]
    bool bigMu;   // mu = 1 + (nu-1) tau; otherwise mu = tau
};

RegionGeometry geometry(Region r) {
    switch (r) {
        case Region::O1: return {true, true, true};
        case Region::O2: return {true, true, false};
        case Region::O3: return {true, false, true};
        case Region::O4: return {true, false, false};
        case Region::N1: return {false, true, true};
        case Region::N2: return {false, true, false};
        case Region::N3: return {false, false, true};
        default: return {false, false, false};
    }
}

double nu_of_axis1(const RegionGeometry& g, double x1) { return g.bigNu ? 1.0 / x1 : x1; }
double mu_of_tau(const RegionGeometry& g, double nu, double tau) {
    return g.bigMu ? 1.0 + (nu - 1.0) * tau : tau;
}

// Per-pair solve products needed to sample both halves of a region pair.
struct PairSolution {
    LegendreParams params;
    double tStar = 0.0;  // the region's rule, not necessarily the pair's own
    std::optional<phase::PhaseFunction> ph;
    std::optional<phase::LogSolutions> logq, logp;  // big-mu regions only
    bool seriesLogs = false;                        // small-mu regions

    double log_p_minus_nu(double t) const {
        if (seriesLogs) return series::logp_series(params, t) - params.nu;
        return cheb::cheb_eval_piecewise(logp->value, t);
    }
    double log_q_plus_nu(double t) const {
        if (seriesLogs) return series::logq_connection(params, t) + params.nu;
        return cheb::cheb_eval_piecewise(logq->value, t);
    }
};

PairSolution solve_pair(const LegendreParams& p, bool bigMu, double epsilon, bool needLogs) {
    PairSolution s;
    s.params = p;
    s.tStar = bigMu ? phase::turning_point(p) : std::pow(p.nu, -1.5);
    s.ph = phase::compute_phase_domain(p, s.tStar, epsilon);
    if (needLogs) {
        if (bigMu) {
            s.logq = phase::compute_logq(p, *s.ph, epsilon);
            s.logp = phase::compute_logp(p, epsilon);
        } else {
            s.seriesLogs = true;
        }
    }
    return s;
}

PairSolution solve_pair_quarantined(const LegendreParams& p, bool bigMu, double epsilon,
                                    bool needLogs) {
    try {
        return solve_pair(p, bigMu, epsilon, needLogs);
    } catch (const std::exception&) {
        // one retry at a relaxed tolerance before giving up
        try {
            return solve_pair(p, bigMu, epsilon * 10.0, needLogs);
        } catch (const std::exception& e) {
            throw TableError("table build failed at nu=" + std::to_string(p.nu) +
                             " mu=" + std::to_string(p.mu) + ": " + e.what());
        }
    }
}

// dyadic-breakpoint union of per-pair adaptive discretizations on [0,1]
void merge_breakpoints(std::set<double>& target, const cheb::PiecewiseExpansion& p,
                       double lo, double hi) {
    for (double b : p.breakpoints) {
        double u = (b - lo) / (hi - lo);
        u = std::clamp(u, 0.0, 1.0);
        // snap to the dyadic lattice so unions stay small
        double snapped = std::round(u * 4294967296.0) / 4294967296.0;
        target.insert(snapped);
    }
}

struct CellBuildResult {
    Cell oCell, nCell;
};

// Shared worker: builds O- and/or N-side cells for one (axis1, axis2) cell.
CellBuildResult build_cell(const TableProfile& profile, const RegionGeometry& g,
                           double x1lo, double x1hi, double x2lo, double x2hi,
                           bool wantO, bool wantN) {
    if (profile.gridPoints != profile.order + 1)
        throw TableError("table build: gridPoints must equal order + 1");
    const int gp = profile.gridPoints - 1;  // grid order
    const int n = profile.order;
    auto g1 = cheb::cheb_nodes(gp, x1lo, x1hi);
    auto g2 = cheb::cheb_nodes(gp, x2lo, x2hi);
    const size_t npairs = g1.nodes.size() * g2.nodes.size();

    std::vector<PairSolution> sols(npairs);
    int threads = profile.threads > 0 ? profile.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, threads);
    {
        std::atomic<size_t> next{0};
        std::exception_ptr firstError;
        std::mutex errMutex;
        auto worker = [&]() {
            for (;;) {
                size_t idx = next.fetch_add(1);
                if (idx >= npairs) return;
                size_t r = idx / g2.nodes.size(), c = idx % g2.nodes.size();
                double nu = nu_of_axis1(g, g1.nodes[r]);
                double mu = mu_of_tau(g, nu, g2.nodes[c]);
                mu = std::min(mu, nu);
                try {
                    sols[idx] =
                        solve_pair_quarantined({nu, mu}, g.bigMu, profile.epsilonSolve, wantN);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(errMutex);
                    if (!firstError) firstError = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (firstError) std::rethrow_exception(firstError);
    }

    double discEps = std::max(profile.epsilonSolve, 1e-14);
    CellBuildResult out;

    auto build_side = [&](bool oscillatory) {
        // unified u-partition across all pairs
        std::set<double> bps{0.0, 1.0};
        for (auto& s : sols) {
            double lo = oscillatory ? s.tStar : s.tStar / 100.0;
            double hi = oscillatory ? kHalfPi : s.tStar;
            auto fd = cheb::adaptive_discretize(
                [&](double u) {
                    double t = lo + (hi - lo) * u;
                    return oscillatory ? s.ph->alpha_prime_at(t) / s.params.nu
                                       : s.log_p_minus_nu(t);
                },
                0.0, 1.0, discEps, n);
            merge_breakpoints(bps, fd, 0.0, 1.0);
            auto gd = cheb::adaptive_discretize(
                [&](double u) {
                    double t = lo + (hi - lo) * u;
                    return oscillatory ? s.ph->alpha_at(t) / s.params.nu : s.log_q_plus_nu(t);
                },
                0.0, 1.0, discEps, n);
            merge_breakpoints(bps, gd, 0.0, 1.0);
        }
        Cell cell;
        cell.uPartition.assign(bps.begin(), bps.end());
        int nu_cells = static_cast<int>(cell.uPartition.size()) - 1;
        cell.prisms.resize(nu_cells);

        auto unit = cheb::cheb_nodes(n, -1.0, 1.0);
        size_t np1 = n + 1;
        std::atomic<int> nextPrism{0};
        std::exception_ptr firstError;
        std::mutex errMutex;
        auto sampler = [&]() {
            std::vector<DoubleDouble> sampA(np1 * np1 * np1);
            std::vector<double> sampB(np1 * np1 * np1);
            std::vector<double> sampC(np1 * np1 * np1), sampD(np1 * np1 * np1);
            for (;;) {
                int kcell = nextPrism.fetch_add(1);
                if (kcell >= nu_cells) return;
                try {
                    double ulo = cell.uPartition[kcell], uhi = cell.uPartition[kcell + 1];
                    cheb::Box3 box{x1lo, x1hi, x2lo, x2hi, ulo, uhi};
                    for (size_t r = 0; r < np1; ++r) {
                        for (size_t c = 0; c < np1; ++c) {
                            const PairSolution& s = sols[r * np1 + c];
                            double lo = oscillatory ? s.tStar : s.tStar / 100.0;
                            double hi = oscillatory ? kHalfPi : s.tStar;
                            for (size_t w = 0; w < np1; ++w) {
                                double u = 0.5 * (ulo + uhi) +
                                           0.5 * (uhi - ulo) * unit.nodes[w];
                                double t = lo + (hi - lo) * u;
                                t = std::clamp(t, lo, hi);
                                size_t idx = (r * np1 + c) * np1 + w;
                                if (oscillatory) {
                                    sampA[idx] = s.ph->alpha_at_dd(t) / s.params.nu;
                                    sampB[idx] = s.ph->alpha_prime_at(t) / s.params.nu;
                                } else {
                                    sampC[idx] = s.log_p_minus_nu(t);
                                    sampD[idx] = s.log_q_plus_nu(t);
                                }
                            }
                        }
                    }
                    auto scale_of = [](const std::vector<double>& v) {
                        double m = 1.0;
                        for (double x : v) m = std::max(m, std::fabs(x));
                        return m;
                    };
                    Prism& prism = cell.prisms[kcell];
                    if (oscillatory) {
                        auto ea = cheb::tri_coeffs_dd(sampA, n, box);
                        double mA = 1.0;
                        for (auto& v : sampA) mA = std::max(mA, std::fabs(v.hi));
                        prism.first = cheb::tri_compress(ea, profile.epsilonCompressPhase * mA);
                        auto eb = cheb::tri_coeffs(sampB, n, box);
                        prism.second =
                            cheb::tri_compress(eb, profile.epsilonCompress * scale_of(sampB));
                    } else {
                        auto ec = cheb::tri_coeffs(sampC, n, box);
                        prism.first =
                            cheb::tri_compress(ec, profile.epsilonCompress * scale_of(sampC));
                        auto ed = cheb::tri_coeffs(sampD, n, box);
                        prism.second =
                            cheb::tri_compress(ed, profile.epsilonCompress * scale_of(sampD));
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lk(errMutex);
                    if (!firstError) firstError = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(sampler);
        for (auto& th : pool) th.join();
        if (firstError) std::rethrow_exception(firstError);
        return cell;
    };

    if (wantO) out.oCell = build_side(true);
    if (wantN) out.nCell = build_side(false);
    return out;
}

void region_axes(const TableProfile& profile, Region r, std::vector<double>& a1,
                 std::vector<double>& a2) {
    RegionGeometry g = geometry(r);
    a1 = g.bigNu ? profile.xiPartition : profile.nuSmallPartition;
    a2 = g.bigMu ? profile.tauPartitionBig : profile.tauPartitionSmall;
}

}  // namespace

const char* region_name(Region r) {
    static const char* names[] = {"O1", "O2", "O3", "O4", "N1", "N2", "N3", "N4"};
    return names[static_cast<uint32_t>(r)];
}

TableProfile TableProfile::desk() {
    TableProfile p;
    p.nuMax = 1e5;
    p.xiPartition = geometric_nodes(1.0 / p.nuMax, 0.1, 7);
    p.tauPartitionBig = {0.0, 0.1, 0.28, 0.5, 0.72, 0.9, 1.0};
    p.tauPartitionSmall = {0.0, 0.35, 0.7, 1.0};
    p.nuSmallPartition = {2.0, 4.5, 10.0};
    return p;
}

TableProfile TableProfile::paper() {
    TableProfile p;
    p.nuMax = 1e6;
    p.xiPartition = geometric_nodes(1.0 / p.nuMax, 0.1, 10);
    p.tauPartitionBig = {0.0,  0.03, 0.08, 0.15, 0.23, 0.32, 0.41, 0.5, 0.59,
                         0.68, 0.77, 0.85, 0.92, 0.96, 0.98, 0.99, 1.0};
    p.tauPartitionSmall = {0.0, 0.25, 0.5, 0.75, 1.0};
    p.nuSmallPartition = {2.0, 5.0, 10.0};
    return p;
}

size_t LegendreTable::coefficient_count() const {
    size_t total = 0;
    for (auto& reg : regions)
        for (auto& cell : reg.cells)
            for (auto& prism : cell.prisms)
                total += prism.first.coeff_count() + prism.second.coeff_count();
    return total;
}

RegionExpansionSet build_region(const TableProfile& profile, Region region) {
    RegionGeometry g = geometry(region);
    RegionExpansionSet set;
    set.id = region;
    region_axes(profile, region, set.axis1, set.axis2);
    int c1 = set.cells1(), c2 = set.cells2();
    set.cells.resize(static_cast<size_t>(c1) * c2);
    for (int i = 0; i < c1; ++i) {
        for (int j = 0; j < c2; ++j) {
            auto res = build_cell(profile, g, set.axis1[i], set.axis1[i + 1], set.axis2[j],
                                  set.axis2[j + 1], g.oscillatory, !g.oscillatory);
            set.cells[i * c2 + j] = g.oscillatory ? std::move(res.oCell) : std::move(res.nCell);
        }
    }
    return set;
}

LegendreTable build_table(const TableProfile& profile) {
    LegendreTable table;
    table.profile = profile;
    // build the O/N pairs together so each (nu, mu) is solved once
    for (int fam = 0; fam < 4; ++fam) {
        Region oReg = static_cast<Region>(fam);
        Region nReg = static_cast<Region>(fam + 4);
        RegionGeometry g = geometry(oReg);
        RegionExpansionSet oSet, nSet;
        oSet.id = oReg;
        nSet.id = nReg;
        region_axes(profile, oReg, oSet.axis1, oSet.axis2);
        nSet.axis1 = oSet.axis1;
        nSet.axis2 = oSet.axis2;
        int c1 = oSet.cells1(), c2 = oSet.cells2();
        oSet.cells.resize(static_cast<size_t>(c1) * c2);
        nSet.cells.resize(static_cast<size_t>(c1) * c2);
        for (int i = 0; i < c1; ++i) {
            for (int j = 0; j < c2; ++j) {
                auto res = build_cell(profile, g, oSet.axis1[i], oSet.axis1[i + 1],
                                      oSet.axis2[j], oSet.axis2[j + 1], true, true);
                oSet.cells[i * c2 + j] = std::move(res.oCell);
                nSet.cells[i * c2 + j] = std::move(res.nCell);
            }
        }
        table.regions[fam] = std::move(oSet);
        table.regions[fam + 4] = std::move(nSet);
    }
    return table;
}

namespace {

int locate_cell(const std::vector<double>& nodes, double x) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    int i = static_cast<int>(it - nodes.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(nodes.size()) - 2);
}

struct Located {
    const Prism* prism;
    Region region;
    double x1, x2, u;
    double dv_du_to_dt;  // du/dt factor for derivative conversion
    const cheb::CompressedTriExpansion* a;
    const cheb::CompressedTriExpansion* b;
};

Located locate(const LegendreTable& table, double nu, double mu, double t) {
    if (!(nu >= 2.0) || nu > table.profile.nuMax)
        throw TableError("eval_table: nu outside the table domain");
    if (!(mu >= 0.0) || mu > nu) throw TableError("eval_table: mu outside [0, nu]");
    if (!(t > 0.0) || t > kHalfPi * (1 + 1e-14)) throw TableError("eval_table: t outside (0, pi/2]");
    bool bigNu = nu >= 10.0;
    bool bigMu = mu >= 1.0;
    double tStar = bigMu ? std::asin(std::sqrt(mu * mu - 0.25) / (nu + 0.5))
                         : std::pow(nu, -1.5);
    bool osc = t >= tStar;
    Region reg = static_cast<Region>((osc ? 0 : 4) + (bigNu ? 0 : 2) + (bigMu ? 0 : 1));
    const RegionExpansionSet& set = table.region(reg);
    Located loc;
    loc.region = reg;
    loc.x1 = bigNu ? 1.0 / nu : nu;
    loc.x2 = bigMu ? (mu - 1.0) / (nu - 1.0) : mu;
    double lo = osc ? tStar : tStar / 100.0;
    double hi = osc ? kHalfPi : tStar;
    if (t < lo * (1 - 1e-12))
        throw TableError("eval_table: t below the tabulated strip");
    loc.u = std::clamp((t - lo) / (hi - lo), 0.0, 1.0);
    loc.dv_du_to_dt = 1.0 / (hi - lo);
    int i = locate_cell(set.axis1, loc.x1);
    int j = locate_cell(set.axis2, loc.x2);
    const Cell& cell = set.cell(i, j);
    int kc = locate_cell(cell.uPartition, loc.u);
    loc.prism = &cell.prisms[kc];
    loc.a = &loc.prism->first;
    loc.b = &loc.prism->second;
    return loc;
}

}  // namespace

TableValues eval_table(const LegendreTable& table, double nu, double mu, double t) {
    Located loc = locate(table, nu, mu, t);
    TableValues v;
    v.region = loc.region;
    v.first = cheb::tri_eval_compressed(*loc.a, loc.x1, loc.x2, loc.u);
    v.second = cheb::tri_eval_compressed(*loc.b, loc.x1, loc.x2, loc.u);
    if (region_oscillatory(loc.region)) {
        v.first *= nu;
        v.second *= nu;
    }
    return v;
}

TableValues eval_table_deriv(const LegendreTable& table, double nu, double mu, double t) {
    Located loc = locate(table, nu, mu, t);
    TableValues v;
    v.region = loc.region;
    v.first = cheb::tri_eval_compressed_dz(*loc.a, loc.x1, loc.x2, loc.u) * loc.dv_du_to_dt;
    v.second = cheb::tri_eval_compressed_dz(*loc.b, loc.x1, loc.x2, loc.u) * loc.dv_du_to_dt;
    if (region_oscillatory(loc.region)) {
        v.first *= nu;
        v.second *= nu;
    }
    return v;
}

}  // namespace aleg::tables
