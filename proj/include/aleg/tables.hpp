// Precomputed-table construction and access: eight function families as
// compressed trivariate Chebyshev expansions over region boxes, built from
// the phase/log computations, serialized bit-exactly.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "aleg/cheb.hpp"
#include "aleg/params.hpp"

namespace aleg::tables {

struct TableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TableProfile {
    double nuMax = 1e5;
    int order = 30;        // expansion order of the trivariate pieces
    int gridPoints = 31;   // Chebyshev sample count per cell axis
    double epsilonSolve = 1e-14;
    double epsilonCompress = 1e-14;
    // the phase family is compressed tighter: its absolute error is
    // amplified by nu when the phase is reconstructed
    double epsilonCompressPhase = 1e-15;
    std::vector<double> xiPartition;       // 1/nu axis, [1/nuMax, 1/10]
    std::vector<double> tauPartitionBig;   // mu = 1 + (nu-1) tau, [0,1]
    std::vector<double> tauPartitionSmall; // mu = tau, [0,1]
    std::vector<double> nuSmallPartition;  // nu axis, [2,10]
    int threads = 0;  // 0: hardware concurrency (build-time only, not stored)

    static TableProfile desk();
    static TableProfile paper();
};

// Region numbering follows the table families: 1/2 large degree (split on
// mu >= 1 / mu < 1), 3/4 small degree.
enum class Region : uint32_t { O1 = 0, O2, O3, O4, N1, N2, N3, N4 };

inline bool region_oscillatory(Region r) { return static_cast<uint32_t>(r) < 4; }
const char* region_name(Region r);

struct Prism {
    cheb::CompressedTriExpansion first;   // A (alpha/nu) or C (logP - nu)
    cheb::CompressedTriExpansion second;  // B (alpha'/nu) or D (logQ + nu)
};

struct Cell {
    std::vector<double> uPartition;  // unified, ascending, covers [0,1]
    std::vector<Prism> prisms;       // one per u subinterval
};

struct RegionExpansionSet {
    Region id = Region::O1;
    std::vector<double> axis1;  // xi nodes (regions 1,2) or nu nodes (3,4)
    std::vector<double> axis2;  // tau nodes
    std::vector<Cell> cells;    // row-major: cell(i,j) = cells[i*(axis2-1)+j]

    int cells1() const { return static_cast<int>(axis1.size()) - 1; }
    int cells2() const { return static_cast<int>(axis2.size()) - 1; }
    const Cell& cell(int i, int j) const { return cells[i * cells2() + j]; }
};

struct LegendreTable {
    uint32_t formatVersion = 1;
    TableProfile profile;
    std::string precisionMode = "double+dd";
    uint64_t buildTimestamp = 0;  // fixed at zero: builds are reproducible
    std::array<RegionExpansionSet, 8> regions;

    const RegionExpansionSet& region(Region r) const {
        return regions[static_cast<uint32_t>(r)];
    }
    size_t coefficient_count() const;
};

// Build one region (each public build re-runs its solves; build_table
// shares solves between the paired O/N regions internally).
RegionExpansionSet build_region(const TableProfile& profile, Region region);

LegendreTable build_table(const TableProfile& profile);

// Table-backed evaluation of the raw families at a parameter point.
struct TableValues {
    Region region;
    double first;   // alpha (already scaled by nu) or logP - nu
    double second;  // alpha' (scaled) or logQ + nu
};
TableValues eval_table(const LegendreTable& table, double nu, double mu, double t);
// t-derivatives of the two stored families at the same point.
TableValues eval_table_deriv(const LegendreTable& table, double nu, double mu, double t);

// Binary serialization: little-endian, magic "ALEG", trailing CRC-32.
void save(const LegendreTable& table, std::ostream& out);
LegendreTable load(std::istream& in);
void save_file(const LegendreTable& table, const std::string& path);
LegendreTable load_file(const std::string& path);

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

}  // namespace aleg::tables
