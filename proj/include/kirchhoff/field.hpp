#pragma once

// Radial functions on R^3 sampled on a log-uniform grid, with the norms
// entering the energy and Pohozaev functionals and the mass-preserving
// dilation (s * u)(x) = e^{3s/2} u(e^s x).
//
// Dilation is pure bookkeeping: a field stores its base samples plus a
// dilation_log, and every norm of the represented function is the base norm
// times an exact exponential factor. This keeps the mass constraint and the
// fiber-map identities exact for arbitrarily concentrated or spread fields.
//
// Quadrature is the trapezoidal rule in the log coordinate t = log r
// (integrand 4 pi r^3 f(r) dt), which converges superalgebraically for smooth
// decaying integrands. The gradient norm uses a 4th-order staggered
// difference at cell midpoints; its exact discrete quadratic form is what the
// solver differentiates.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/landscape.hpp"
#include "kirchhoff/numerics.hpp"

namespace kirchhoff {

struct RadialGrid {
    std::vector<double> r;            // strictly increasing, log-uniform
    double log_step = 0.0;            // t_{i+1} - t_i
    std::vector<double> node_weight;  // 4 pi r_i^3 h (trapezoid, halved at ends)
    std::vector<double> mid_radius;   // r_i e^{h/2}
    std::vector<double> mid_weight;   // 4 pi r_mid^3 h

    std::size_t size() const { return r.size(); }
    double r_min() const { return r.front(); }
    double r_max() const { return r.back(); }

    static std::shared_ptr<const RadialGrid> log_uniform(double r_min, double r_max,
                                                         std::size_t n) {
        if (!(r_min > 0.0) || !(r_max > r_min))
            throw std::invalid_argument("RadialGrid: need 0 < r_min < r_max");
        if (n < 512) throw std::invalid_argument("RadialGrid: need at least 512 nodes");
        if (!(r_min <= 1e-4 * r_max))
            throw std::invalid_argument("RadialGrid: need r_min <= 1e-4 r_max");
        auto g = std::make_shared<RadialGrid>();
        const double t0 = std::log(r_min);
        const double h = (std::log(r_max) - t0) / static_cast<double>(n - 1);
        g->log_step = h;
        g->r.resize(n);
        g->node_weight.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            g->r[i] = std::exp(t0 + h * static_cast<double>(i));
            g->node_weight[i] = 4.0 * kPi * g->r[i] * g->r[i] * g->r[i] * h;
        }
        g->node_weight.front() *= 0.5;
        g->node_weight.back() *= 0.5;
        g->mid_radius.resize(n - 1);
        g->mid_weight.resize(n - 1);
        const double half = std::exp(0.5 * h);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            g->mid_radius[i] = g->r[i] * half;
            g->mid_weight[i] = 4.0 * kPi * std::pow(g->mid_radius[i], 3) * h;
        }
        return g;
    }

    // Default working grid: resolves instanton scales down to ~5e-2 and the
    // exponential tails of the GN extremals simultaneously.
    static std::shared_ptr<const RadialGrid> standard() {
        static const auto g = log_uniform(1e-5, 1e3, 4096);
        return g;
    }

    // Wide grid for the (slowly decaying) Aubin-Talenti instanton, whose
    // gradient integrand has a 1/r tail in the mass measure.
    static std::shared_ptr<const RadialGrid> wide() {
        static const auto g = log_uniform(1e-8, 1e10, 8192);
        return g;
    }
};

namespace detail {

// Midpoint derivatives of the node samples in the log coordinate, divided by
// r_mid: d_i approximates (du/dr)(r_mid_i). Interior rows use the 4th-order
// staggered stencil, the two boundary cells the plain two-point difference.
inline void midpoint_derivative(const RadialGrid& g, const std::vector<double>& v,
                                std::vector<double>& d) {
    const std::size_t n = v.size();
    const double h = g.log_step;
    d.resize(n - 1);
    d[0] = (v[1] - v[0]) / (h * g.mid_radius[0]);
    for (std::size_t i = 1; i + 2 < n; ++i)
        d[i] = (27.0 * (v[i + 1] - v[i]) - (v[i + 2] - v[i - 1])) / (24.0 * h * g.mid_radius[i]);
    d[n - 2] = (v[n - 1] - v[n - 2]) / (h * g.mid_radius[n - 2]);
}

inline double quad_gradient_sq(const RadialGrid& g, const std::vector<double>& v) {
    std::vector<double> d;
    midpoint_derivative(g, v, d);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) acc += g.mid_weight[i] * d[i] * d[i];
    return acc;
}

inline double quad_lp_pow(const RadialGrid& g, const std::vector<double>& v, double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        acc += g.node_weight[i] * std::pow(std::fabs(v[i]), p);
    return acc;
}

inline double quad_mass_sq(const RadialGrid& g, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += g.node_weight[i] * v[i] * v[i];
    return acc;
}

}  // namespace detail

class RadialField {
public:
    RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values,
                double dilation_log = 0.0)
        : grid_(std::move(grid)),
          values_(std::make_shared<const std::vector<double>>(std::move(values))),
          dilation_log_(dilation_log) {
        if (!grid_ || values_->size() != grid_->size())
            throw std::invalid_argument("RadialField: values/grid size mismatch");
        base_mass_sq_ = detail::quad_mass_sq(*grid_, *values_);
        base_grad_sq_ = detail::quad_gradient_sq(*grid_, *values_);
    }

    const RadialGrid& grid() const { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
    const std::vector<double>& base_values() const { return *values_; }
    double dilation_log() const { return dilation_log_; }

    // Norms of the represented function e^{3s/2} u(e^s r); the s-dependence
    // is exact bookkeeping, never requadrature.
    double mass_sq() const { return base_mass_sq_; }
    double mass_norm() const { return std::sqrt(base_mass_sq_); }
    double grad_sq() const { return std::exp(2.0 * dilation_log_) * base_grad_sq_; }
    double grad_norm() const { return std::sqrt(grad_sq()); }
    double lp_pow(double p) const {
        // ||s * u||_p^p = e^{3(p-2)s/2} ||u||_p^p
        return std::exp(1.5 * (p - 2.0) * dilation_log_) *
               detail::quad_lp_pow(*grid_, *values_, p);
    }
    double lp_norm(double p) const { return std::pow(lp_pow(p), 1.0 / p); }

    RadialField dilated(double s) const {
        RadialField out = *this;
        out.dilation_log_ += s;
        return out;
    }

    double base_max_abs() const {
        double m = 0.0;
        for (double v : *values_) m = std::max(m, std::fabs(v));
        return m;
    }

private:
    std::shared_ptr<const RadialGrid> grid_;
    std::shared_ptr<const std::vector<double>> values_;
    double dilation_log_ = 0.0;
    double base_mass_sq_ = 0.0;
    double base_grad_sq_ = 0.0;
};

inline double mass_norm(const RadialField& u) { return u.mass_norm(); }
inline double grad_norm(const RadialField& u) { return u.grad_norm(); }
inline double lp_norm(const RadialField& u, double p) { return u.lp_norm(p); }

inline RadialField dilate(const RadialField& u, double s) { return u.dilated(s); }

template <class F>
RadialField make_field(std::shared_ptr<const RadialGrid> grid, F&& f, double dilation_log = 0.0) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->r[i]);
    return RadialField(std::move(grid), std::move(v), dilation_log);
}

// Pointwise evaluator of the represented function, interpolating the base
// samples with a monotone cubic. Queries left of the grid clamp to the center
// value; queries right of it return 0.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const RadialField& u)
        : interp_(u.grid().r, u.base_values()),
          s_(u.dilation_log()),
          amp_(std::exp(1.5 * u.dilation_log())),
          r_max_(u.grid().r_max()) {}

    double operator()(double r) const {
        const double rb = r * std::exp(s_);
        if (rb > r_max_) return 0.0;
        return amp_ * interp_(rb);
    }

private:
    PchipInterpolant interp_;
    double s_, amp_, r_max_;
};

// Resamples the represented function onto its grid as a base field
// (dilation_log = 0). Only used for modest shifts; solvers carry large
// dilations in the bookkeeping instead.
inline RadialField materialize(const RadialField& u) {
    if (u.dilation_log() == 0.0) return u;
    FieldEvaluator eval(u);
    std::vector<double> v(u.grid().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval(u.grid().r[i]);
    return RadialField(u.grid_ptr(), std::move(v));
}

inline RadialField normalize_mass(const RadialField& u, double c) {
    const double m = u.mass_norm();
    if (!(m > 0.0)) throw std::invalid_argument("normalize_mass: zero field");
    const double k = c / m;
    std::vector<double> v = u.base_values();
    for (double& x : v) x *= k;
    return RadialField(u.grid_ptr(), std::move(v), u.dilation_log());
}

// ---------------------------------------------------------------------------
// Energy, Pohozaev and fiber packing
// ---------------------------------------------------------------------------

// E_mu(u) = (a/2)||grad u||^2 + (b/4)||grad u||^4 - ||u||_p^p/p - mu ||u||_q^q/q
inline double energy(const ModelParams& model, const RadialField& u) {
    const double g2 = u.grad_sq();
    return 0.5 * model.a * g2 + 0.25 * model.b * g2 * g2 - u.lp_pow(model.p) / model.p -
           model.mu * u.lp_pow(model.q) / model.q;
}

// P_mu(u) = a||grad u||^2 + b||grad u||^4 - mu dq ||u||_q^q - dp ||u||_p^p
inline double pohozaev(const ModelParams& model, const RadialField& u) {
    const double g2 = u.grad_sq();
    return model.a * g2 + model.b * g2 * g2 - model.mu * model.delta_q() * u.lp_pow(model.q) -
           model.delta_p() * u.lp_pow(model.p);
}

inline FiberParams fiber_of(const ModelParams& model, const RadialField& u) {
    FiberParams fp;
    const double g2 = u.grad_sq();
    fp.t2_coef = 0.5 * model.a * g2;
    fp.t4_coef = 0.25 * model.b * g2 * g2;
    fp.tp_coef = u.lp_pow(model.p) / model.p;
    fp.tq_coef = model.mu * u.lp_pow(model.q) / model.q;
    fp.p_exp = model.p * model.delta_p();
    fp.q_exp = model.q * model.delta_q();
    return fp;
}

// ---------------------------------------------------------------------------
// Discrete radial Laplacians
// ---------------------------------------------------------------------------

// The operator whose quadratic form is exactly the discrete gradient norm:
// (neg_laplacian_sbp(u), v)_mass = sum_m w_m (Gu)_m (Gv)_m for every v. The
// solver's energy gradient uses this, so discrete stationarity is exact.
inline std::vector<double> neg_laplacian_sbp(const RadialGrid& g, const std::vector<double>& v) {
    const std::size_t n = v.size();
    const double h = g.log_step;
    std::vector<double> d;
    detail::midpoint_derivative(g, v, d);
    std::vector<double> out(n, 0.0);
    {  // boundary cells: two-point rows
        const double z0 = g.mid_weight[0] * d[0] / (h * g.mid_radius[0]);
        out[0] -= z0;
        out[1] += z0;
        const double zl = g.mid_weight[n - 2] * d[n - 2] / (h * g.mid_radius[n - 2]);
        out[n - 2] -= zl;
        out[n - 1] += zl;
    }
    for (std::size_t i = 1; i + 2 < n; ++i) {
        const double z = g.mid_weight[i] * d[i] / (24.0 * h * g.mid_radius[i]);
        out[i - 1] += z;
        out[i] -= 27.0 * z;
        out[i + 1] += 27.0 * z;
        out[i + 2] -= z;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= g.node_weight[i];
    return out;
}

// Independent 4th-order stencil for Lap(u) = (v'' + v') / r^2 in the log
// coordinate (second order one-sided at the boundary rows). This is the
// discretization behind pde_residual; it shares nothing with the quadrature
// path above.
inline std::vector<double> laplacian_stencil(const RadialGrid& g, const std::vector<double>& v) {
    const std::size_t n = v.size();
    const double h = g.log_step;
    std::vector<double> out(n);
    auto emit = [&](std::size_t i, double d1, double d2) {
        out[i] = (d2 + d1) / (g.r[i] * g.r[i]);
    };
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double d1 = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
        const double d2 =
            (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) /
            (12.0 * h * h);
        emit(i, d1, d2);
    }
    auto fwd = [&](std::size_t i) {
        const double d1 = (-3.0 * v[i] + 4.0 * v[i + 1] - v[i + 2]) / (2.0 * h);
        const double d2 = (2.0 * v[i] - 5.0 * v[i + 1] + 4.0 * v[i + 2] - v[i + 3]) / (h * h);
        emit(i, d1, d2);
    };
    auto bwd = [&](std::size_t i) {
        const double d1 = (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h);
        const double d2 = (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h);
        emit(i, d1, d2);
    };
    fwd(0);
    fwd(1);
    bwd(n - 2);
    bwd(n - 1);
    return out;
}

// ---------------------------------------------------------------------------
// Plain-text field I/O: one "radius value" pair per line, full precision.
// A dilated field is written at the transformed radii, so the file always
// holds the represented function exactly.
// ---------------------------------------------------------------------------

inline void dump_field(const RadialField& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_field: cannot open " + path);
    const double rs = std::exp(-u.dilation_log());
    const double amp = std::exp(1.5 * u.dilation_log());
    char line[80];
    for (std::size_t i = 0; i < u.grid().size(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g %.17g\n", u.grid().r[i] * rs,
                      amp * u.base_values()[i]);
        out << line;
    }
}

inline RadialField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_field: cannot open " + path);
    std::vector<double> r, v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double ri, vi;
        if (!(ls >> ri >> vi)) throw std::runtime_error("load_field: malformed line: " + line);
        r.push_back(ri);
        v.push_back(vi);
    }
    const std::size_t n = r.size();
    if (n < 512) throw std::runtime_error("load_field: too few samples");
    auto grid = std::make_shared<RadialGrid>();
    const double h = (std::log(r.back()) - std::log(r.front())) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (!(r[i] > r[i - 1])) throw std::runtime_error("load_field: radii not increasing");
        if (std::fabs(std::log(r[i] / r[i - 1]) - h) > 1e-9 * h)
            throw std::runtime_error("load_field: radii are not log-uniform");
    }
    grid->log_step = h;
    grid->r = r;
    grid->node_weight.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid->node_weight[i] = 4.0 * kPi * r[i] * r[i] * r[i] * h;
    grid->node_weight.front() *= 0.5;
    grid->node_weight.back() *= 0.5;
    grid->mid_radius.resize(n - 1);
    grid->mid_weight.resize(n - 1);
    const double half = std::exp(0.5 * h);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        grid->mid_radius[i] = r[i] * half;
        grid->mid_weight[i] = 4.0 * kPi * std::pow(grid->mid_radius[i], 3) * h;
    }
    return RadialField(grid, std::move(v));
}

}  // namespace kirchhoff
