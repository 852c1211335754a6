#include "aleg/ode_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aleg {

namespace {

using cheb::ChebGrid1D;
using cheb::cheb_coeffs_1d;
using cheb::cheb_nodes;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Dense LU with partial pivoting; solves in place.
void lu_solve(std::vector<double>& A, std::vector<double>& rhs, int n) {
    for (int col = 0; col < n; ++col) {
        int p = col;
        double best = std::fabs(A[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(A[r * n + col]);
            if (v > best) {
                best = v;
                p = r;
            }
        }
        if (best == 0.0) throw SolverFailure("singular Newton system");
        if (p != col) {
            for (int j = 0; j < n; ++j) std::swap(A[col * n + j], A[p * n + j]);
            std::swap(rhs[col], rhs[p]);
        }
        double d = A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double m = A[r * n + col] / d;
            if (m == 0.0) continue;
            for (int j = col + 1; j < n; ++j) A[r * n + j] -= m * A[col * n + j];
            rhs[r] -= m * rhs[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int j = r + 1; j < n; ++j) s -= A[r * n + j] * rhs[j];
        rhs[r] = s / A[r * n + r];
    }
}

// Spectral integration matrix on the unit interval at the (k+1)-point grid,
// anchored so that (I v)(anchor node) = 0. Column j is the anchored
// antiderivative of the cardinal function of node j, sampled at the nodes.
std::vector<double> integration_matrix(int k, int anchor_node) {
    int n1 = k + 1;
    ChebGrid1D g = cheb_nodes(k, -1.0, 1.0);
    std::vector<double> I(n1 * n1, 0.0);
    std::vector<double> e(n1, 0.0);
    for (int j = 0; j < n1; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto exp1 = cheb_coeffs_1d(e, g);
        std::vector<double> c(exp1.coeffs);
        c[0] *= 0.5;
        c[k] *= 0.5;
        std::vector<double> C(n1 + 1, 0.0);
        for (int m = 1; m <= k + 1; ++m) {
            double cm1 = c[m - 1];
            double cp1 = (m + 1 <= k) ? c[m + 1] : 0.0;
            C[m] = (cm1 - cp1) / (2.0 * m);
        }
        C[1] = (k >= 2) ? c[0] - 0.5 * c[2] : c[0];
        for (int i = 0; i < n1; ++i) {
            double x = g.nodes[i];
            double b1 = 0.0, b2 = 0.0;
            for (int m = k + 1; m >= 1; --m) {
                double b0 = 2.0 * x * b1 - b2 + C[m];
                b2 = b1;
                b1 = b0;
            }
            I[i * n1 + j] = x * b1 - b2 + C[0];
        }
        double off = I[anchor_node * n1 + j];
        for (int i = 0; i < n1; ++i) I[i * n1 + j] -= off;
    }
    return I;
}

void matvec(const std::vector<double>& M, const std::vector<double>& v,
            std::vector<double>& out, int n) {
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* row = M.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
}

// (max tail coefficient, max coefficient) of the expansion of the values
std::pair<double, double> tail_and_max(std::span<const double> values, const ChebGrid1D& unit) {
    auto e = cheb_coeffs_1d(values, unit);
    int n = unit.n;
    int lo = (n % 2 == 0) ? n / 2 + 1 : (n + 1) / 2 + 1;
    double tail = 0.0, all = 0.0;
    for (int i = 0; i <= n; ++i) {
        double v = std::fabs(e.coeffs[i]);
        all = std::max(all, v);
        if (i >= lo) tail = std::max(tail, v);
    }
    return {tail, all};
}

struct IntervalResult {
    double c, d;
    std::vector<double> y, yp, ypp;  // values at the (k+1)-point grid, ascending in t
};

}  // namespace

OdeSolution solve_ode(const OdeProblem& p) {
    if (!(p.a < p.b)) throw SolverFailure("solve_ode: invalid interval");
    if (p.k < 8) throw SolverFailure("solve_ode: order must be >= 8");
    const int k = p.k;
    const int n1 = k + 1;
    const bool fwd = p.direction == OdeDirection::Forward;
    ChebGrid1D unit = cheb_nodes(k, -1.0, 1.0);
    const int anchor_node = fwd ? 0 : k;
    std::vector<double> I = integration_matrix(k, anchor_node);
    std::vector<double> I2(n1 * n1);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) {
            double acc = 0.0;
            for (int l = 0; l < n1; ++l) acc += I[i * n1 + l] * I[l * n1 + j];
            I2[i * n1 + j] = acc;
        }

    double ya = p.y0, ypa = p.yp0;
    std::vector<IntervalResult> results;
    std::vector<std::pair<double, double>> pending{{p.a, p.b}};
    const double min_width = 1e-12 * (p.b - p.a);
    bool have_prev = false;
    double prev_end_val = 0.0, prev_end_slope = 0.0, prev_end_t = 0.0;

    std::vector<double> t(n1), sigma(n1), yv(n1), ypv(n1), R(n1);
    std::vector<double> Rtry(n1), ytry(n1), yptry(n1), sig_try(n1);
    std::vector<double> J(n1 * n1), delta(n1);

    while (!pending.empty()) {
        auto [c, d] = pending.back();
        pending.pop_back();

        bool accepted = false;
        while (!accepted) {
            if (static_cast<int>(results.size() + pending.size()) >= p.max_intervals)
                throw SolverFailure("solve_ode: subinterval budget exceeded");
            double s = 0.5 * (d - c);
            double mid = 0.5 * (c + d);
            for (int i = 0; i < n1; ++i) t[i] = mid + s * unit.nodes[i];
            t[0] = c;
            t[k] = d;
            double ta = fwd ? c : d;

            if (have_prev) {
                for (int i = 0; i < n1; ++i)
                    sigma[i] = prev_end_val + prev_end_slope * (t[i] - prev_end_t);
            } else {
                std::fill(sigma.begin(), sigma.end(), p.f(ta, ya, ypa));
            }

            auto eval_state = [&](const std::vector<double>& sig, std::vector<double>& yy,
                                  std::vector<double>& yyp) {
                matvec(I, sig, yyp, n1);
                for (int i = 0; i < n1; ++i) yyp[i] = ypa + s * yyp[i];
                matvec(I, yyp, yy, n1);
                for (int i = 0; i < n1; ++i) yy[i] = ya + s * yy[i];
            };
            auto residual = [&](const std::vector<double>& sig, const std::vector<double>& yy,
                                const std::vector<double>& yyp, std::vector<double>& out) {
                double norm = 0.0;
                for (int i = 0; i < n1; ++i) {
                    out[i] = sig[i] - p.f(t[i], yy[i], yyp[i]);
                    norm = std::max(norm, std::fabs(out[i]));
                }
                return norm;
            };
            auto valid_state = [&](const std::vector<double>& yy) {
                if (!p.y_valid) return true;
                for (double v : yy)
                    if (!p.y_valid(v)) return false;
                return true;
            };
            // Fixed convergence yardstick from the anchor-end state. Judging
            // convergence or tail noise against the current iterate would let
            // spurious under-resolved Newton roots through.
            double scale0 = 1.0;
            for (int i = 0; i < n1; ++i) {
                scale0 = std::max(scale0, std::fabs(p.f(t[i], ya, ypa)));
                if (p.f_scale) scale0 = std::max(scale0, std::fabs(p.f_scale(t[i], ya, ypa)));
            }

            eval_state(sigma, yv, ypv);
            bool newton_ok = valid_state(yv);
            double rnorm = newton_ok ? residual(sigma, yv, ypv, R)
                                     : std::numeric_limits<double>::infinity();
            if (newton_ok) {
                newton_ok = false;
                for (int it = 0; it < p.max_newton; ++it) {
                    double scale = scale0;
                    if (rnorm <= 50.0 * kEps * scale) {
                        newton_ok = true;
                        break;
                    }
                    for (int i = 0; i < n1; ++i) {
                        double fy = p.df_dy(t[i], yv[i], ypv[i]);
                        double fyp = p.df_dyp(t[i], yv[i], ypv[i]);
                        for (int j = 0; j < n1; ++j)
                            J[i * n1 + j] = -fy * s * s * I2[i * n1 + j] - fyp * s * I[i * n1 + j];
                        J[i * n1 + i] += 1.0;
                    }
                    for (int i = 0; i < n1; ++i) delta[i] = -R[i];
                    try {
                        lu_solve(J, delta, n1);
                    } catch (const SolverFailure&) {
                        break;
                    }
                    double lambda = 1.0;
                    bool stepped = false;
                    for (int h = 0; h <= 8; ++h) {
                        for (int i = 0; i < n1; ++i) sig_try[i] = sigma[i] + lambda * delta[i];
                        eval_state(sig_try, ytry, yptry);
                        if (valid_state(ytry)) {
                            double rn = residual(sig_try, ytry, yptry, Rtry);
                            if (rn <= (1.0 - 0.25 * lambda) * rnorm || rn <= 50.0 * kEps * scale) {
                                sigma.swap(sig_try);
                                yv.swap(ytry);
                                ypv.swap(yptry);
                                R.swap(Rtry);
                                rnorm = rn;
                                stepped = true;
                                break;
                            }
                        }
                        lambda *= 0.5;
                    }
                    if (!stepped) {
                        newton_ok = rnorm <= 1e4 * kEps * scale;  // roundoff plateau
                        break;
                    }
                    if (rnorm <= 50.0 * kEps * scale) {
                        newton_ok = true;
                        break;
                    }
                }
                if (!newton_ok && rnorm <= 1e4 * kEps * scale0) newton_ok = true;
            }

            // Tail acceptance with a floor at the noise level of evaluating
            // f: its pieces can cancel catastrophically (they dwarf y''),
            // and no refinement pushes the y'' tail below that noise.
            // Integration shrinks the noise by the interval half-width per
            // level, hence the s-scaled floors for y' and y.
            bool tails_ok = false;
            if (newton_ok) {
                double floor2 = p.f_scale ? 300.0 * kEps * scale0 : 0.0;
                auto [tS, aS] = tail_and_max(sigma, unit);
                auto [tP, aP] = tail_and_max(ypv, unit);
                auto [tY, aY] = tail_and_max(yv, unit);
                tails_ok = tS < std::max(p.epsilon * aS, floor2) &&
                           tP < std::max(p.epsilon * aP, floor2 * s) &&
                           tY < std::max(p.epsilon * aY, floor2 * s * s);
            }
            if (newton_ok && tails_ok) {
                accepted = true;
                int far = fwd ? k : 0;
                ya = yv[far];
                ypa = ypv[far];
                prev_end_val = sigma[far];
                prev_end_t = t[far];
                {
                    auto e = cheb_coeffs_1d(sigma, unit);
                    cheb::PiecewiseExpansion one;
                    one.n = k;
                    one.breakpoints = {c, d};
                    one.coeffs = e.coeffs;
                    prev_end_slope = cheb::cheb_eval_piecewise_deriv(one, t[far]);
                }
                have_prev = true;
                results.push_back(IntervalResult{c, d, yv, ypv, sigma});
            } else {
                if (d - c < min_width)
                    throw SolverFailure(newton_ok ? "solve_ode: interval underflow"
                                                  : "solve_ode: Newton failed to contract");
                double m = 0.5 * (c + d);
                if (fwd) {
                    pending.emplace_back(m, d);
                    d = m;
                } else {
                    pending.emplace_back(c, m);
                    c = m;
                }
            }
        }
    }

    if (!fwd) std::reverse(results.begin(), results.end());

    OdeSolution sol;
    for (auto* pe : {&sol.y, &sol.yp, &sol.ypp}) {
        pe->n = k;
        pe->breakpoints.reserve(results.size() + 1);
        pe->coeffs.reserve(results.size() * n1);
        pe->breakpoints.push_back(results.front().c);
    }
    for (auto& r : results) {
        for (auto [vals, pe] : {std::pair{&r.y, &sol.y}, {&r.yp, &sol.yp}, {&r.ypp, &sol.ypp}}) {
            pe->breakpoints.push_back(r.d);
            auto e = cheb_coeffs_1d(*vals, unit);
            pe->coeffs.insert(pe->coeffs.end(), e.coeffs.begin(), e.coeffs.end());
        }
    }
    return sol;
}

}  // namespace aleg
