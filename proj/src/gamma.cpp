#include "aleg/gamma.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aleg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SignedLog lgamma_signed(double x) {
    if (x > 0.0) return {std::lgamma(x), 1};
    if (x == std::floor(x)) return {0.0, 0};  // pole of Gamma
    // Reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x)).
    double s = sinpi(x);
    double la = std::log(kPi) - std::log(std::fabs(s)) - std::lgamma(1.0 - x);
    return {la, s > 0.0 ? 1 : -1};
}

namespace {

// Even-order polygamma psi^(2k)(x) for large x by the asymptotic series
// psi(x) ~ ln x - 1/(2x) - sum B_{2n}/(2n x^{2n}); differentiated 2k times.
double polygamma_even_asymp(int m, double x) {
    // psi^{(m)}(x) = (-1)^{m-1} [ (m-1)!/x^m + m!/(2 x^{m+1})
    //                + sum_n B_{2n} (2n+m-1)!/((2n)! x^{2n+m}) ]
    static const double b2n[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30,
                                 5.0 / 66, -691.0 / 2730, 7.0 / 6};
    double lf = 0.0;  // log((m-1)!)
    for (int i = 2; i < m; ++i) lf += std::log(static_cast<double>(i));
    double xm = m * std::log(x);
    double sum = std::exp(lf - xm) + std::exp(lf + std::log(static_cast<double>(m)) - xm) / (2.0 * x);
    double fact_ratio = static_cast<double>(m) * (m + 1) / 2.0;  // (2n+m-1)!/((2n)! ) at n=1
    double xp = std::pow(x, -(2.0 + m));
    for (int n = 1; n <= 7; ++n) {
        double term = b2n[n - 1] * fact_ratio * std::exp(lf) * xp;
        sum += term;
        if (std::fabs(term) < 1e-20 * std::fabs(sum)) break;
        // update (2n+m-1)!/(2n)! -> (2n+m+1)!/(2n+2)!
        fact_ratio *= static_cast<double>(2 * n + m) * (2 * n + m + 1) /
                      (static_cast<double>(2 * n + 1) * (2 * n + 2));
        xp /= x * x;
    }
    return ((m % 2 == 0) ? -1.0 : 1.0) * sum;
}

double digamma_asymp(double x) {
    static const double b2n[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30,
                                 5.0 / 66, -691.0 / 2730, 7.0 / 6};
    double r = std::log(x) - 0.5 / x;
    double x2 = x * x;
    double xp = 1.0 / x2;
    for (int n = 1; n <= 7; ++n) {
        r -= b2n[n - 1] / (2.0 * n) * xp;
        xp /= x2;
    }
    return r;
}

}  // namespace

DoubleDouble log_gamma_ratio_dd(double nu, double mu) {
    if (mu < 0.0 || nu < mu) throw std::domain_error("log_gamma_ratio: need 0 <= mu <= nu");
    bool mild = (mu >= nu / 100.0) || (nu <= 1e4);
    if (mild)
        return dd::sub(dd::lgamma(DoubleDouble{nu - mu + 1.0}),
                       dd::lgamma(DoubleDouble{nu + mu + 1.0}));
    return DoubleDouble{log_gamma_ratio(nu, mu)};
}

double log_gamma_ratio(double nu, double mu) {
    if (mu < 0.0 || nu < mu) throw std::domain_error("log_gamma_ratio: need 0 <= mu <= nu");
    bool mild = (mu >= nu / 100.0) || (nu <= 1e4);
    if (mild) return log_gamma_ratio_dd(nu, mu).to_double();
    // lgamma(x-y) - lgamma(x+y) = -2 [ y psi(x) + y^3 psi''(x)/3! + ... ],
    // x = nu+1, y = mu. With mu < nu/100 the odd series converges fast.
    double x = nu + 1.0, y = mu;
    double sum = y * digamma_asymp(x);
    double y2 = y * y;
    double yp = y * y2;
    double fact = 6.0;  // (2k+1)! at k=1
    for (int k = 1; k <= 8; ++k) {
        double term = polygamma_even_asymp(2 * k, x) * yp / fact;
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        yp *= y2;
        fact *= static_cast<double>(2 * k + 2) * (2 * k + 3);
    }
    return -2.0 * sum;
}

double cospi(double x) {
    double r = x - 2.0 * std::nearbyint(0.5 * x);  // r in [-1, 1], exact
    double a = std::fabs(r);
    if (a <= 0.25) return std::cos(kPi * a);
    if (a <= 0.75) return std::sin(kPi * (0.5 - a));
    return -std::cos(kPi * (1.0 - a));
}

double sinpi(double x) {
    double r = x - 2.0 * std::nearbyint(0.5 * x);
    double a = std::fabs(r);
    double v;
    if (a <= 0.25) v = std::sin(kPi * a);
    else if (a <= 0.75) v = std::cos(kPi * (0.5 - a));
    else v = std::sin(kPi * (1.0 - a));
    return r < 0.0 ? -v : v;
}

double tanpi(double x) {
    double c = cospi(x);
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return sinpi(x) / c;
}

void LogSum::add(double logAbs, int sign) {
    if (sign == 0) return;
    if (empty_) {
        scale_ = logAbs;
        acc_ = static_cast<double>(sign);
        empty_ = false;
        return;
    }
    double d = logAbs - scale_;
    if (d > 40.0) {
        // rescale accumulator down
        acc_ = acc_ * std::exp(-d) + static_cast<double>(sign);
        scale_ = logAbs;
    } else {
        acc_ += sign * std::exp(d);
        if (std::fabs(acc_) > 1e250) {
            double shift = std::log(std::fabs(acc_));
            scale_ += shift;
            acc_ *= std::exp(-shift);
        }
    }
}

void LogSum::add_value(double v) {
    if (v == 0.0) return;
    add(std::log(std::fabs(v)), v > 0.0 ? 1 : -1);
}

SignedLog LogSum::result() const {
    if (empty_ || acc_ == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    return {scale_ + std::log(std::fabs(acc_)), acc_ > 0.0 ? 1 : -1};
}

double LogSum::log_positive() const {
    SignedLog r = result();
    if (r.sign <= 0) throw std::domain_error("LogSum: expected a positive sum");
    return r.logAbs;
}

}  // namespace aleg
