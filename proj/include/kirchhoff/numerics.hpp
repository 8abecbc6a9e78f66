#pragma once

// Small numerical building blocks shared across the toolkit: bracketed
// root finding, an adaptive Cash-Karp RK45 stepper, monotone cubic (PCHIP)
// interpolation, tridiagonal solves and least-squares slope fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kirchhoff {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

// Bisection on [lo, hi]; f(lo) and f(hi) must have opposite signs.
// Returns the midpoint of the final bracket of width <= xtol.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::runtime_error("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct SignChange {
    double lo = 0.0;
    double hi = 0.0;
    int direction = 0;  // +1: f goes negative->positive, -1: positive->negative
};

// Scans f on a uniform grid over [lo, hi] and returns every sign-change
// bracket. Exact zeros at sample points are folded into the adjacent bracket.
template <class F>
std::vector<SignChange> scan_sign_changes(F&& f, double lo, double hi, int n) {
    std::vector<SignChange> out;
    const double h = (hi - lo) / static_cast<double>(n - 1);
    double xprev = lo;
    double fprev = f(lo);
    for (int i = 1; i < n; ++i) {
        const double x = lo + h * static_cast<double>(i);
        const double fx = f(x);
        if (fprev == 0.0) {
            fprev = fx;  // treat a grazing zero as part of the next interval
            xprev = x;
            continue;
        }
        if (fx != 0.0 && (fx > 0.0) != (fprev > 0.0)) {
            out.push_back({xprev, x, fx > 0.0 ? +1 : -1});
        }
        if (fx != 0.0) {
            xprev = x;
            fprev = fx;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive RK45 (Cash-Karp) for small ODE systems
// ---------------------------------------------------------------------------

struct OdeOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double initial_step = 1e-4;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2000000;
};

// Integrates y' = f(x, y) from x0 to x1 (x1 > x0), calling observe(x, y)
// after every accepted step (and once at x0). The observer returns false to
// stop the integration early. State dimension is fixed by y0.
template <class F, class Observer>
void integrate_ode(F&& f, double x0, double x1, std::vector<double> y,
                   const OdeOptions& opt, Observer&& observe) {
    static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                        d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 1.0 / 4;

    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), yt(n), ynew(n), yerr(n);
    double x = x0;
    double h = std::min(opt.initial_step, x1 - x0);
    if (!observe(x, y)) return;
    for (std::size_t step = 0; step < opt.max_steps && x < x1; ++step) {
        h = std::min({h, opt.max_step, x1 - x});
        f(x, y, k1);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * b21 * k1[i];
        f(x + a2 * h, yt, k2);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
        f(x + a3 * h, yt, k3);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
        f(x + a4 * h, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
        f(x + a5 * h, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i]);
        f(x + a6 * h, yt, k6);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ynew[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            yerr[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err = std::max(err, std::fabs(yerr[i]) / sc);
        }
        if (err <= 1.0) {
            x += h;
            y = ynew;
            if (!observe(x, y)) return;
        }
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        if (!(h > 0.0) || !std::isfinite(err))
            throw std::runtime_error("integrate_ode: step size collapsed");
    }
    if (x < x1) throw std::runtime_error("integrate_ode: max step count exceeded");
}

// ---------------------------------------------------------------------------
// Monotone cubic (PCHIP) interpolation
// ---------------------------------------------------------------------------

// Fritsch-Carlson shape-preserving cubic. Evaluation outside [x.front(),
// x.back()] clamps to the boundary values.
class PchipInterpolant {
public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || n != y_.size())
            throw std::invalid_argument("PchipInterpolant: need >= 2 matching nodes");
        d_.resize(n);
        std::vector<double> h(n - 1), slope(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            if (!(h[i] > 0.0)) throw std::invalid_argument("PchipInterpolant: x not increasing");
            slope[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2) {
            d_[0] = d_[1] = slope[0];
        } else {
            d_[0] = edge_derivative(h[0], h[1], slope[0], slope[1]);
            d_[n - 1] = edge_derivative(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (slope[i - 1] * slope[i] <= 0.0) {
                    d_[i] = 0.0;
                } else {
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
                }
            }
        }
    }

    double operator()(double xq) const {
        if (xq <= x_.front()) return y_.front();
        if (xq >= x_.back()) return y_.back();
        std::size_t i = static_cast<std::size_t>(
            std::upper_bound(x_.begin(), x_.end(), xq) - x_.begin() - 1);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
    }

private:
    static double edge_derivative(double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0)
            d = 0.0;
        else if (s0 * s1 < 0.0 && std::fabs(d) > 3.0 * std::fabs(s0))
            d = 3.0 * s0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

// ---------------------------------------------------------------------------
// Linear algebra helpers
// ---------------------------------------------------------------------------

// Thomas algorithm; sub/sup have length n-1, diag length n. Overwrites rhs.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& sub,
                                             std::vector<double> diag,
                                             const std::vector<double>& sup,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i - 1] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace kirchhoff
