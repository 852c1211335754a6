#include "aleg/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace aleg::cheb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Transform matrix row weights: b_i = (2/n) sum''_l T_i(rho_l) f_l.
// T_i(rho_l) = cos(i*pi*(n-l)/n) since rho_l = -cos(pi l/n).
struct TransformMatrix {
    int n;
    std::vector<double> m;  // (n+1)x(n+1), row i applied to samples
    explicit TransformMatrix(int n_) : n(n_), m((n_ + 1) * (n_ + 1)) {
        for (int i = 0; i <= n; ++i) {
            for (int l = 0; l <= n; ++l) {
                double w = (l == 0 || l == n) ? 0.5 : 1.0;
                long prod = static_cast<long>(i) * (n - l);
                m[i * (n + 1) + l] = (2.0 / n) * w * std::cos(kPi * (prod % (2L * n)) / n);
            }
        }
    }
};

const TransformMatrix& transform_matrix(int n) {
    static thread_local std::vector<std::unique_ptr<TransformMatrix>> cache;
    if (static_cast<size_t>(n) >= cache.size()) cache.resize(n + 1);
    if (!cache[n]) cache[n] = std::make_unique<TransformMatrix>(n);
    return *cache[n];
}

// Clenshaw for sum'' c_i T_i(x).
double clenshaw_halved(std::span<const double> c, double x) {
    int n = static_cast<int>(c.size()) - 1;
    double b1 = 0.0, b2 = 0.0;
    double last = 0.5 * c[n];
    for (int k = n; k >= 1; --k) {
        double ck = (k == n) ? last : c[k];
        double b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + 0.5 * c[0];
}

// Derivative of sum'' c_i T_i at x (interval scale applied by caller).
double clenshaw_halved_deriv(std::span<const double> c, double x) {
    // Differentiate coefficients: d_{k-1} = d_{k+1} + 2k c_k with c_n halved.
    int n = static_cast<int>(c.size()) - 1;
    std::vector<double> d(n + 1, 0.0);
    double dkp1 = 0.0, dkp2 = 0.0;
    for (int k = n; k >= 1; --k) {
        double ck = (k == n) ? 0.5 * c[k] : c[k];
        double dkm1 = dkp2 + 2.0 * k * ck;
        d[k - 1] = dkm1;
        dkp2 = dkp1;
        dkp1 = dkm1;
    }
    d[0] *= 0.5;
    // d is now an ordinary-convention coefficient vector of length n.
    double b1 = 0.0, b2 = 0.0;
    for (int k = n - 1; k >= 1; --k) {
        double b0 = 2.0 * x * b1 - b2 + d[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + d[0];
}

double map_to_unit(double x, double a, double b) {
    return (2.0 * x - (b + a)) / (b - a);
}

double tail_ratio(std::span<const double> c) {
    int n = static_cast<int>(c.size()) - 1;
    int lo = n / 2 + 1;
    if (n % 2 != 0) lo = (n + 1) / 2 + 1;
    double tail = 0.0, all = 0.0;
    for (int i = 0; i <= n; ++i) {
        double v = std::fabs(c[i]);
        all = std::max(all, v);
        if (i >= lo) tail = std::max(tail, v);
    }
    if (all == 0.0) return 0.0;  // zero function is resolved
    return tail / all;
}

}  // namespace

ChebGrid1D cheb_nodes(int n, double a, double b) {
    if (n < 1) throw ChebError("cheb_nodes: order must be >= 1");
    if (!(a < b)) throw ChebError("cheb_nodes: invalid interval (a >= b)");
    ChebGrid1D g{n, a, b, {}};
    g.nodes.resize(n + 1);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j <= n; ++j)
        g.nodes[j] = mid - half * std::cos(kPi * j / n);
    g.nodes[0] = a;
    g.nodes[n] = b;
    return g;
}

double cheb_eval_poly(int n, double x) {
    if (std::fabs(x) > 1.0 + 4.0 * kEps)
        throw ChebError("cheb_eval_poly: |x| > 1");
    x = std::clamp(x, -1.0, 1.0);
    if (n == 0) return 1.0;
    double tm1 = 1.0, t = x;
    for (int k = 2; k <= n; ++k) {
        double tn = 2.0 * x * t - tm1;
        tm1 = t;
        t = tn;
    }
    return t;
}

void cheb_poly_all(int n, double x, std::span<double> out) {
    out[0] = 1.0;
    if (n == 0) return;
    out[1] = x;
    for (int k = 2; k <= n; ++k) out[k] = 2.0 * x * out[k - 1] - out[k - 2];
}

ChebExpansion1D cheb_coeffs_1d(std::span<const double> samples, const ChebGrid1D& grid) {
    int n = grid.n;
    if (static_cast<int>(samples.size()) != n + 1)
        throw ChebError("cheb_coeffs_1d: sample count mismatch");
    const auto& tm = transform_matrix(n);
    ChebExpansion1D e{grid, std::vector<double>(n + 1)};
    for (int i = 0; i <= n; ++i) {
        double acc = 0.0;
        const double* row = tm.m.data() + i * (n + 1);
        for (int l = 0; l <= n; ++l) acc += row[l] * samples[l];
        e.coeffs[i] = acc;
    }
    return e;
}

double cheb_eval_1d(const ChebExpansion1D& exp, double x) {
    double u = map_to_unit(x, exp.grid.a, exp.grid.b);
    if (std::fabs(u) > 1.0 + 64.0 * kEps)
        throw ChebError("cheb_eval_1d: point outside interval");
    return clenshaw_halved(exp.coeffs, std::clamp(u, -1.0, 1.0));
}

int PiecewiseExpansion::locate(double x) const {
    double span = breakpoints.back() - breakpoints.front();
    double slack = 64.0 * kEps * std::max(span, std::fabs(breakpoints.back()));
    if (x < breakpoints.front() - slack || x > breakpoints.back() + slack)
        throw ChebError("piecewise eval: point out of range");
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    int i = static_cast<int>(it - breakpoints.begin()) - 1;
    return std::clamp(i, 0, pieces() - 1);
}

double cheb_eval_piecewise(const PiecewiseExpansion& p, double x) {
    int i = p.locate(x);
    double u = map_to_unit(x, p.breakpoints[i], p.breakpoints[i + 1]);
    return clenshaw_halved(p.piece_coeffs(i), std::clamp(u, -1.0, 1.0));
}

double cheb_eval_piecewise_deriv(const PiecewiseExpansion& p, double x) {
    int i = p.locate(x);
    double a = p.breakpoints[i], b = p.breakpoints[i + 1];
    double u = map_to_unit(x, a, b);
    return clenshaw_halved_deriv(p.piece_coeffs(i), std::clamp(u, -1.0, 1.0)) * 2.0 / (b - a);
}

PiecewiseExpansion adaptive_discretize(const std::function<double(double)>& f,
                                       double a, double b, double epsilon, int n,
                                       int max_intervals) {
    if (!(a < b)) throw ChebError("adaptive_discretize: invalid interval");
    ChebGrid1D unit = cheb_nodes(n, -1.0, 1.0);
    std::vector<std::pair<double, double>> todo{{a, b}};
    std::vector<std::pair<double, double>> out;
    std::vector<std::vector<double>> out_coeffs;
    std::vector<double> samples(n + 1);
    double min_width = 1e-13 * (b - a);
    while (!todo.empty()) {
        if (static_cast<int>(todo.size()) > max_intervals)
            throw DiscretizationFailure("adaptive_discretize: interval budget exceeded");
        auto [c, d] = todo.back();
        todo.pop_back();
        double mid = 0.5 * (c + d), half = 0.5 * (d - c);
        for (int j = 0; j <= n; ++j) samples[j] = f(mid + half * unit.nodes[j]);
        auto e = cheb_coeffs_1d(samples, unit);
        if (tail_ratio(e.coeffs) < epsilon) {
            out.emplace_back(c, d);
            out_coeffs.push_back(std::move(e.coeffs));
            if (static_cast<int>(out.size()) > max_intervals)
                throw DiscretizationFailure("adaptive_discretize: interval budget exceeded");
        } else {
            if (d - c < min_width)
                throw DiscretizationFailure("adaptive_discretize: interval underflow");
            todo.emplace_back(mid, d);
            todo.emplace_back(c, mid);
        }
    }
    // Depth-first with the left half processed first yields sorted output,
    // but sort defensively.
    std::vector<size_t> order(out.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return out[i].first < out[j].first; });
    PiecewiseExpansion p;
    p.n = n;
    p.breakpoints.reserve(out.size() + 1);
    p.breakpoints.push_back(a);
    for (size_t idx : order) {
        p.breakpoints.push_back(out[idx].second);
        p.coeffs.insert(p.coeffs.end(), out_coeffs[idx].begin(), out_coeffs[idx].end());
    }
    return p;
}

namespace {

// Ordinary-convention antiderivative coefficients of one piece (unit
// interval, scale applied by caller): C_1 = c0 - c2/2, C_m = (c_{m-1} -
// c_{m+1})/(2m). Input in halved convention, output ordinary with C_0 = 0.
std::vector<double> antideriv_coeffs_unit(std::span<const double> bh) {
    int n = static_cast<int>(bh.size()) - 1;
    std::vector<double> c(n + 1);
    for (int i = 0; i <= n; ++i) c[i] = bh[i];
    c[0] *= 0.5;
    c[n] *= 0.5;
    std::vector<double> C(n + 2, 0.0);
    for (int m = 1; m <= n + 1; ++m) {
        double cm1 = c[m - 1];
        double cp1 = (m + 1 <= n) ? c[m + 1] : 0.0;
        C[m] = (cm1 - cp1) / (2.0 * m);
        if (m == 1) C[1] = c[0] - 0.5 * ((2 <= n) ? c[2] : 0.0);
    }
    return C;
}

double eval_ordinary(std::span<const double> c, double x) {
    int n = static_cast<int>(c.size()) - 1;
    double b1 = 0.0, b2 = 0.0;
    for (int k = n; k >= 1; --k) {
        double b0 = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + c[0];
}

}  // namespace

PiecewiseExpansion spectral_antiderivative_dd(const PiecewiseExpansion& p,
                                              double anchor_t, DoubleDouble anchor_value,
                                              std::vector<DoubleDouble>* piece_left_values) {
    int n = p.n, m = p.pieces();
    if (anchor_t < p.lo() - 1e-12 || anchor_t > p.hi() + 1e-12)
        throw ChebError("spectral_antiderivative: anchor outside domain");
    // Per piece: ordinary antiderivative coefficients with zero constant,
    // plus the piece's definite integral, accumulated in double-double.
    std::vector<std::vector<double>> C(m);
    std::vector<DoubleDouble> integral(m);
    std::vector<DoubleDouble> left0(m);  // value at the piece left edge with C0=0
    for (int i = 0; i < m; ++i) {
        double s = 0.5 * (p.breakpoints[i + 1] - p.breakpoints[i]);
        auto Ci = antideriv_coeffs_unit(p.piece_coeffs(i));
        for (auto& v : Ci) v *= s;
        // definite integral over the piece = F(1) - F(-1)
        DoubleDouble f1{0.0}, fm1{0.0};
        for (int k = 1; k < static_cast<int>(Ci.size()); ++k) {
            f1 = f1 + Ci[k];
            fm1 = fm1 + ((k % 2 == 0) ? Ci[k] : -Ci[k]);
        }
        integral[i] = f1 - fm1;
        left0[i] = fm1;
        C[i] = std::move(Ci);
    }
    // Cumulative value at the left edge of each piece, with F(lo) = 0.
    std::vector<DoubleDouble> cum(m + 1);
    cum[0] = DoubleDouble{0.0};
    for (int i = 0; i < m; ++i) cum[i + 1] = cum[i] + integral[i];
    // Offset so that F(anchor_t) = anchor_value.
    int ia = p.locate(std::clamp(anchor_t, p.lo(), p.hi()));
    double ua = map_to_unit(anchor_t, p.breakpoints[ia], p.breakpoints[ia + 1]);
    DoubleDouble at_anchor = cum[ia] - left0[ia];
    at_anchor = at_anchor + eval_ordinary(C[ia], std::clamp(ua, -1.0, 1.0));
    DoubleDouble offset = anchor_value - at_anchor;

    PiecewiseExpansion F;
    F.n = n + 1;
    F.breakpoints = p.breakpoints;
    F.coeffs.resize(static_cast<size_t>(m) * (n + 2));
    if (piece_left_values) piece_left_values->resize(m);
    for (int i = 0; i < m; ++i) {
        DoubleDouble c0 = cum[i] - left0[i] + offset;
        if (piece_left_values) (*piece_left_values)[i] = left0[i] + c0;
        double* dst = F.coeffs.data() + static_cast<size_t>(i) * (n + 2);
        // Convert ordinary -> halved convention: b0 = 2*c0, b_last = 2*c_last.
        dst[0] = 2.0 * c0.to_double();
        for (int k = 1; k <= n; ++k) dst[k] = C[i][k];
        dst[n + 1] = 2.0 * C[i][n + 1];
    }
    return F;
}

PiecewiseExpansion spectral_antiderivative(const PiecewiseExpansion& p,
                                           double anchor_t, double anchor_value) {
    return spectral_antiderivative_dd(p, anchor_t, DoubleDouble{anchor_value}, nullptr);
}

PiecewiseExpansion spectral_derivative(const PiecewiseExpansion& p) {
    int n = p.n, m = p.pieces();
    PiecewiseExpansion D;
    D.n = n;
    D.breakpoints = p.breakpoints;
    D.coeffs.resize(p.coeffs.size());
    for (int i = 0; i < m; ++i) {
        auto c = p.piece_coeffs(i);
        double scale = 2.0 / (p.breakpoints[i + 1] - p.breakpoints[i]);
        std::vector<double> d(n + 1, 0.0);
        double dkp1 = 0.0, dkp2 = 0.0;
        for (int k = n; k >= 1; --k) {
            double ck = (k == n) ? 0.5 * c[k] : c[k];
            double dkm1 = dkp2 + 2.0 * k * ck;
            d[k - 1] = dkm1;
            dkp2 = dkp1;
            dkp1 = dkm1;
        }
        // The recurrence leaves d[0] at twice the ordinary constant, which is
        // exactly the halved-convention slot; d[n] stays zero.
        double* dst = D.coeffs.data() + static_cast<size_t>(i) * (n + 1);
        for (int k = 0; k <= n; ++k) dst[k] = d[k] * scale;
    }
    return D;
}

PiecewiseExpansion restrict_piecewise(const PiecewiseExpansion& p, double a, double b) {
    if (a < p.lo() - 1e-12 || b > p.hi() + 1e-12 || !(a < b))
        throw ChebError("restrict_piecewise: bad range");
    a = std::max(a, p.lo());
    b = std::min(b, p.hi());
    int n = p.n;
    ChebGrid1D unit = cheb_nodes(n, -1.0, 1.0);
    PiecewiseExpansion r;
    r.n = n;
    r.breakpoints.push_back(a);
    std::vector<double> samples(n + 1);
    for (int i = 0; i < p.pieces(); ++i) {
        double c = std::max(p.breakpoints[i], a);
        double d = std::min(p.breakpoints[i + 1], b);
        if (!(c < d)) continue;
        if (c == p.breakpoints[i] && d == p.breakpoints[i + 1]) {
            auto pc = p.piece_coeffs(i);
            r.coeffs.insert(r.coeffs.end(), pc.begin(), pc.end());
        } else {
            double mid = 0.5 * (c + d), half = 0.5 * (d - c);
            for (int j = 0; j <= n; ++j)
                samples[j] = cheb_eval_piecewise(p, std::clamp(mid + half * unit.nodes[j], c, d));
            auto e = cheb_coeffs_1d(samples, unit);
            r.coeffs.insert(r.coeffs.end(), e.coeffs.begin(), e.coeffs.end());
        }
        r.breakpoints.push_back(d);
    }
    return r;
}

TriChebExpansion tri_coeffs(std::span<const double> samples, int n, const Box3& box) {
    size_t np1 = n + 1;
    if (samples.size() != np1 * np1 * np1)
        throw ChebError("tri_coeffs: sample count mismatch");
    const auto& tm = transform_matrix(n);
    TriChebExpansion e{n, box, std::vector<double>(samples.begin(), samples.end())};
    std::vector<double> tmp(np1 * np1 * np1);
    // Transform along each axis in turn.
    auto pass = [&](const std::vector<double>& src, std::vector<double>& dst, int axis) {
        size_t stride = (axis == 0) ? np1 * np1 : (axis == 1) ? np1 : 1;
        // Iterate over all lines along `axis`.
        for (size_t o = 0; o < np1 * np1; ++o) {
            size_t base;
            if (axis == 0) base = o;                    // o = s*np1 + t
            else if (axis == 1) base = (o / np1) * np1 * np1 + (o % np1);
            else base = o * np1;                        // o = r*np1 + s
            for (size_t i = 0; i < np1; ++i) {
                double acc = 0.0;
                const double* row = tm.m.data() + i * np1;
                for (size_t l = 0; l < np1; ++l) acc += row[l] * src[base + l * stride];
                dst[base + i * stride] = acc;
            }
        }
    };
    pass(e.coeffs, tmp, 0);
    pass(tmp, e.coeffs, 1);
    pass(e.coeffs, tmp, 2);
    e.coeffs = tmp;
    return e;
}

TriChebExpansion tri_coeffs_dd(std::span<const DoubleDouble> samples, int n, const Box3& box) {
    size_t np1 = n + 1;
    if (samples.size() != np1 * np1 * np1)
        throw ChebError("tri_coeffs_dd: sample count mismatch");
    const auto& tm = transform_matrix(n);
    std::vector<DoubleDouble> a(samples.begin(), samples.end());
    std::vector<DoubleDouble> b(np1 * np1 * np1);
    auto pass = [&](const std::vector<DoubleDouble>& src, std::vector<DoubleDouble>& dst, int axis) {
        size_t stride = (axis == 0) ? np1 * np1 : (axis == 1) ? np1 : 1;
        for (size_t o = 0; o < np1 * np1; ++o) {
            size_t base;
            if (axis == 0) base = o;
            else if (axis == 1) base = (o / np1) * np1 * np1 + (o % np1);
            else base = o * np1;
            for (size_t i = 0; i < np1; ++i) {
                DoubleDouble acc{0.0};
                const double* row = tm.m.data() + i * np1;
                for (size_t l = 0; l < np1; ++l)
                    acc = acc + src[base + l * stride] * row[l];
                dst[base + i * stride] = acc;
            }
        }
    };
    pass(a, b, 0);
    pass(b, a, 1);
    pass(a, b, 2);
    TriChebExpansion e{n, box, std::vector<double>(np1 * np1 * np1)};
    for (size_t i = 0; i < b.size(); ++i) e.coeffs[i] = b[i].to_double();
    return e;
}

double tri_eval(const TriChebExpansion& exp, double x, double y, double z) {
    int n = exp.n;
    size_t np1 = n + 1;
    double ux = map_to_unit(x, exp.box.x0, exp.box.x1);
    double uy = map_to_unit(y, exp.box.y0, exp.box.y1);
    double uz = map_to_unit(z, exp.box.z0, exp.box.z1);
    std::vector<double> tx(np1), ty(np1), tz(np1);
    cheb_poly_all(n, std::clamp(ux, -1.0, 1.0), tx);
    cheb_poly_all(n, std::clamp(uy, -1.0, 1.0), ty);
    cheb_poly_all(n, std::clamp(uz, -1.0, 1.0), tz);
    double acc = 0.0;
    for (size_t i = 0; i < np1; ++i) {
        double wi = (i == 0 || i == np1 - 1) ? 0.5 : 1.0;
        double acc_i = 0.0;
        for (size_t j = 0; j < np1; ++j) {
            double wj = (j == 0 || j == np1 - 1) ? 0.5 : 1.0;
            double acc_j = 0.0;
            const double* row = exp.coeffs.data() + (i * np1 + j) * np1;
            for (size_t k = 0; k < np1; ++k) {
                double wk = (k == 0 || k == np1 - 1) ? 0.5 : 1.0;
                acc_j += wk * row[k] * tz[k];
            }
            acc_i += wj * acc_j * ty[j];
        }
        acc += wi * acc_i * tx[i];
    }
    return acc;
}

CompressedTriExpansion tri_compress(const TriChebExpansion& exp, double epsilon) {
    if (!(epsilon > 0.0)) throw ChebError("tri_compress: epsilon must be positive");
    int n = exp.n;
    size_t np1 = n + 1;
    auto b = [&](int i, int j, int k) {
        return exp.coeffs[(static_cast<size_t>(i) * np1 + j) * np1 + k];
    };
    // M: least index such that all slabs above it are below epsilon.
    int M = 0;
    for (int i = n; i >= 1; --i) {
        double mx = 0.0;
        for (size_t j = 0; j < np1; ++j)
            for (size_t k = 0; k < np1; ++k)
                mx = std::max(mx, std::fabs(b(i, j, k)));
        if (mx >= epsilon) {
            M = i;
            break;
        }
    }
    CompressedTriExpansion c;
    c.n = n;
    c.box = exp.box;
    c.epsilon = epsilon;
    c.M = static_cast<uint32_t>(M);
    c.m.resize(M + 1);
    for (int i = 0; i <= M; ++i) {
        int mi = 0;
        for (int j = n; j >= 1; --j) {
            double mx = 0.0;
            for (size_t k = 0; k < np1; ++k) mx = std::max(mx, std::fabs(b(i, j, k)));
            if (mx >= epsilon) {
                mi = j;
                break;
            }
        }
        c.m[i] = static_cast<uint32_t>(mi);
        for (int j = 0; j <= mi; ++j) {
            int nij = 0;
            for (int k = n; k >= 1; --k) {
                if (std::fabs(b(i, j, k)) >= epsilon) {
                    nij = k;
                    break;
                }
            }
            c.nIdx.push_back(static_cast<uint32_t>(nij));
            for (int k = 0; k <= nij; ++k) {
                double w = 1.0;
                if (i == 0 || i == n) w *= 0.5;
                if (j == 0 || j == n) w *= 0.5;
                if (k == 0 || k == n) w *= 0.5;
                c.coeffs.push_back(b(i, j, k) * w);
            }
        }
    }
    return c;
}

double tri_eval_compressed(const CompressedTriExpansion& cexp, double x, double y, double z) {
    int n = cexp.n;
    if (n > 63) throw ChebError("tri_eval_compressed: order too large");
    double ux = map_to_unit(x, cexp.box.x0, cexp.box.x1);
    double uy = map_to_unit(y, cexp.box.y0, cexp.box.y1);
    double uz = map_to_unit(z, cexp.box.z0, cexp.box.z1);
    if (std::fabs(ux) > 1.0 + 1e-12 || std::fabs(uy) > 1.0 + 1e-12 ||
        std::fabs(uz) > 1.0 + 1e-12)
        throw ChebError("tri_eval_compressed: point outside box");
    ux = std::clamp(ux, -1.0, 1.0);
    uy = std::clamp(uy, -1.0, 1.0);
    uz = std::clamp(uz, -1.0, 1.0);
    double tx[64], ty[64], tz[64];
    cheb_poly_all(n, ux, {tx, static_cast<size_t>(n + 1)});
    cheb_poly_all(n, uy, {ty, static_cast<size_t>(n + 1)});
    cheb_poly_all(n, uz, {tz, static_cast<size_t>(n + 1)});
    const double* coef = cexp.coeffs.data();
    const uint32_t* nij = cexp.nIdx.data();
    double acc = 0.0;
    for (uint32_t i = 0; i <= cexp.M; ++i) {
        double acc_i = 0.0;
        for (uint32_t j = 0; j <= cexp.m[i]; ++j) {
            uint32_t kn = *nij++;
            double acc_j = 0.0;
            for (uint32_t k = 0; k <= kn; ++k) acc_j += coef[k] * tz[k];
            coef += kn + 1;
            acc_i += acc_j * ty[j];
        }
        acc += acc_i * tx[i];
    }
    return acc;
}

double tri_eval_compressed_dz(const CompressedTriExpansion& cexp, double x, double y, double z) {
    int n = cexp.n;
    if (n > 63) throw ChebError("tri_eval_compressed_dz: order too large");
    double ux = map_to_unit(x, cexp.box.x0, cexp.box.x1);
    double uy = map_to_unit(y, cexp.box.y0, cexp.box.y1);
    double uz = map_to_unit(z, cexp.box.z0, cexp.box.z1);
    ux = std::clamp(ux, -1.0, 1.0);
    uy = std::clamp(uy, -1.0, 1.0);
    uz = std::clamp(uz, -1.0, 1.0);
    double tx[64], ty[64], uzp[64];
    cheb_poly_all(n, ux, {tx, static_cast<size_t>(n + 1)});
    cheb_poly_all(n, uy, {ty, static_cast<size_t>(n + 1)});
    // dT_k/dz = k*U_{k-1}(z); fill U_{k-1} by recurrence.
    uzp[0] = 0.0;
    if (n >= 1) {
        double um1 = 1.0, u = 2.0 * uz;  // U_0, U_1
        uzp[1] = 1.0 * um1;
        if (n >= 2) uzp[2] = 2.0 * u;
        for (int k = 3; k <= n; ++k) {
            double un = 2.0 * uz * u - um1;
            um1 = u;
            u = un;
            uzp[k] = k * u;
        }
    }
    const double* coef = cexp.coeffs.data();
    const uint32_t* nij = cexp.nIdx.data();
    double acc = 0.0;
    for (uint32_t i = 0; i <= cexp.M; ++i) {
        double acc_i = 0.0;
        for (uint32_t j = 0; j <= cexp.m[i]; ++j) {
            uint32_t kn = *nij++;
            double acc_j = 0.0;
            for (uint32_t k = 1; k <= kn; ++k) acc_j += coef[k] * uzp[k];
            coef += kn + 1;
            acc_i += acc_j * ty[j];
        }
        acc += acc_i * tx[i];
    }
    return acc * 2.0 / (cexp.box.z1 - cexp.box.z0);
}

}  // namespace aleg::cheb
