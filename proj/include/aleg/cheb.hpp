// Univariate and trivariate Chebyshev machinery: grids, coefficient
// transforms, piecewise expansions, compression, adaptive discretization,
// spectral integration and differentiation.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aleg/double_double.hpp"

namespace aleg::cheb {

// Chebyshev extrema grid rho_{j,n} = -cos(pi j / n) mapped to [a,b],
// ascending, nodes[0] == a, nodes[n] == b.
struct ChebGrid1D {
    int n = 0;
    double a = -1.0, b = 1.0;
    std::vector<double> nodes;
};

ChebGrid1D cheb_nodes(int n, double a, double b);

// T_n(x) by the backward three-term recurrence. |x| may exceed 1 by up to
// 4 ulps (clamped); beyond that a domain error is thrown.
double cheb_eval_poly(int n, double x);

// Fills T_0(x)..T_n(x).
void cheb_poly_all(int n, double x, std::span<double> out);

// Expansion sum'' b_i T_i (first and last coefficients halved on
// evaluation, the paper's double-dash convention).
struct ChebExpansion1D {
    ChebGrid1D grid;
    std::vector<double> coeffs;
};

// samples[j] = f(grid.nodes[j]), ascending node order.
ChebExpansion1D cheb_coeffs_1d(std::span<const double> samples, const ChebGrid1D& grid);

double cheb_eval_1d(const ChebExpansion1D& exp, double x);

// One smooth function as order-n Chebyshev pieces over a partition.
// coeffs is row-major: piece i occupies [i*(n+1), (i+1)*(n+1)).
struct PiecewiseExpansion {
    int n = 0;
    std::vector<double> breakpoints;   // m+1 strictly increasing values
    std::vector<double> coeffs;        // m*(n+1)

    int pieces() const { return static_cast<int>(breakpoints.size()) - 1; }
    double lo() const { return breakpoints.front(); }
    double hi() const { return breakpoints.back(); }
    // Piece index containing x; ties at an interior breakpoint resolve right.
    int locate(double x) const;
    std::span<const double> piece_coeffs(int i) const {
        return {coeffs.data() + static_cast<size_t>(i) * (n + 1), static_cast<size_t>(n + 1)};
    }
};

double cheb_eval_piecewise(const PiecewiseExpansion& p, double x);
double cheb_eval_piecewise_deriv(const PiecewiseExpansion& p, double x);

// Adaptive bisection discretization of f over [a,b] at order n. Every
// accepted piece has tail ratio Delta < epsilon where Delta compares
// max|b_k|, k = ceil(n/2)+1..n against max|b_k| over all k.
PiecewiseExpansion adaptive_discretize(const std::function<double(double)>& f,
                                       double a, double b, double epsilon, int n,
                                       int max_intervals = 300);

// Antiderivative F with F' = p and F(anchor_t) = anchor_value. Cross-piece
// offsets are accumulated in double-double.
PiecewiseExpansion spectral_antiderivative(const PiecewiseExpansion& p,
                                           double anchor_t, double anchor_value);

// Same, but also reports the exact per-piece left-endpoint values of F in
// double-double (used when sampling functions with large dynamic range).
PiecewiseExpansion spectral_antiderivative_dd(const PiecewiseExpansion& p,
                                              double anchor_t, DoubleDouble anchor_value,
                                              std::vector<DoubleDouble>* piece_left_values);

PiecewiseExpansion spectral_derivative(const PiecewiseExpansion& p);

// Restriction of p to [a,b] (subset of its domain). Pieces straddling the
// cut are re-expanded on the clipped interval, which is exact for
// polynomial pieces up to roundoff.
PiecewiseExpansion restrict_piecewise(const PiecewiseExpansion& p, double a, double b);

struct Box3 {
    double x0, x1, y0, y1, z0, z1;
};

// Full order-n trivariate expansion: coeffs[i*(n+1)^2 + j*(n+1) + k].
struct TriChebExpansion {
    int n = 0;
    Box3 box{};
    std::vector<double> coeffs;
};

// samples on the tensor grid of cheb_nodes along each axis, indexed
// samples[r*(n+1)^2 + s*(n+1) + t] with r the x index.
TriChebExpansion tri_coeffs(std::span<const double> samples, int n, const Box3& box);
// Same transform carried out in double-double (sampling values given as
// DoubleDouble); coefficients are rounded to double at the end.
TriChebExpansion tri_coeffs_dd(std::span<const DoubleDouble> samples, int n, const Box3& box);

double tri_eval(const TriChebExpansion& exp, double x, double y, double z);

// Section-2.3-style compressed expansion: ragged index limits M, m_i,
// n_{i,j}; retained coefficients carry the halving weights.
struct CompressedTriExpansion {
    int n = 0;
    Box3 box{};
    double epsilon = 0.0;
    uint32_t M = 0;
    std::vector<uint32_t> m;        // size M+1
    std::vector<uint32_t> nIdx;     // ragged, sum(m_i+1) entries
    std::vector<double> coeffs;     // ragged, matches nIdx layout
    size_t coeff_count() const { return coeffs.size(); }
};

CompressedTriExpansion tri_compress(const TriChebExpansion& exp, double epsilon);

double tri_eval_compressed(const CompressedTriExpansion& cexp, double x, double y, double z);
// Partial derivative with respect to the third variable.
double tri_eval_compressed_dz(const CompressedTriExpansion& cexp, double x, double y, double z);

struct ChebError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DiscretizationFailure : ChebError {
    using ChebError::ChebError;
};

}  // namespace aleg::cheb
