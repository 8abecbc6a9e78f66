#pragma once

// Critical points of E_mu on the mass sphere.
//
// Both branches are computed by descent on a reduced functional: project the
// iterate onto the chosen Pohozaev branch along its dilation fiber (P+ for
// the local minimizer, P- for the mountain pass), take a preconditioned
// tangent-gradient step there, renormalize the mass, reproject. At a
// projected point the fiber derivative vanishes, so the tangent gradient of
// E_mu is exactly the gradient of the reduced functional.
//
// The dilation shift is carried in the field's dilation_log and the gradient
// is pulled back to the base frame (dilation is an L^2 isometry), so the
// iterate's profile stays at unit scale on the grid even when the solution
// concentrates or spreads by many decades.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/field.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/landscape.hpp"
#include "kirchhoff/numerics.hpp"

namespace kirchhoff {

struct SolveOptions {
    // stop: <g, H^{-1} g> <= grad_tol (1 + |E|), i.e. the energy decrease a
    // full preconditioned step could still extract is below grad_tol
    // relative to the energy scale
    double grad_tol = 1e-7;
    double pohozaev_tol = 1e-6;  // stop: |P_mu| <= pohozaev_tol a ||grad u||^2
    int max_iterations = 100000;
    double armijo = 1e-4;
    int max_backtracks = 60;
    // per-iteration hook (iteration, J, sigma, stationarity); diagnostics only
    std::function<void(int, double, double, double)> trace;
};

// Dilation shift s placing u on the requested Pohozaev branch: s_u for P+
// (fiber minimum), t_u for P- (fiber maximum).
inline double project_to_pohozaev(const ModelParams& model, const RadialField& u, Branch branch) {
    const LandscapeReport rep = classify_fiber(fiber_of(model, u));
    if (rep.kind == FiberKind::Unclassified)
        throw std::runtime_error("project_to_pohozaev: fiber landscape unclassified");
    if (branch == Branch::PPlus) {
        if (rep.kind != FiberKind::TwoCritical)
            throw std::invalid_argument("project_to_pohozaev: P+ branch absent in this regime");
        return *rep.s_min;
    }
    return *rep.s_max;
}

// lambda = (a||grad u||^2 + b||grad u||^4 - mu||u||_q^q - ||u||_p^p) / c^2,
// the Lagrange multiplier of a critical point.
inline double multiplier_estimate(const ModelParams& model, const RadialField& u) {
    const double g2 = u.grad_sq();
    return (model.a * g2 + model.b * g2 * g2 - model.mu * u.lp_pow(model.q) -
            u.lp_pow(model.p)) /
           (model.c * model.c);
}

namespace detail {

// Strong-form operator applied in the base frame of u = sigma * w:
//   F = -(a + b||grad u||^2) e^{2 sigma} Lap(w) - e^{p dp sigma}|w|^{p-2}w
//       - mu e^{q dq sigma}|w|^{q-2}w,
// so that the equation reads F = lambda w. Uses the independent 4th-order
// stencil, not the quadrature-adjoint operator the solver differentiates.
inline std::vector<double> strong_form(const ModelParams& model, const RadialField& u) {
    const auto& g = u.grid();
    const auto& w = u.base_values();
    const double sig = u.dilation_log();
    const double stiff = (model.a + model.b * u.grad_sq()) * std::exp(2.0 * sig);
    const double cp = std::exp(model.p * model.delta_p() * sig);
    const double cq = model.mu * std::exp(model.q * model.delta_q() * sig);
    std::vector<double> lap = laplacian_stencil(g, w);
    std::vector<double> F(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        F[i] = -stiff * lap[i] - cp * std::pow(std::fabs(w[i]), model.p - 2.0) * w[i] -
               cq * std::pow(std::fabs(w[i]), model.q - 2.0) * w[i];
    return F;
}

inline double weighted_norm(const RadialGrid& g, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += g.node_weight[i] * v[i] * v[i];
    return std::sqrt(acc);
}

}  // namespace detail

// Relative strong-form residual of (u, lambda) in the mass-weighted norm:
// ||F - lambda w|| / max(term norms). Discretized independently of the energy
// gradient, so it cross-checks converged solves.
inline double pde_residual(const ModelParams& model, const RadialField& u, double lambda) {
    const auto& g = u.grid();
    const auto& w = u.base_values();
    const std::vector<double> F = detail::strong_form(model, u);
    std::vector<double> R(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) R[i] = F[i] - lambda * w[i];

    const double sig = u.dilation_log();
    const double stiff = (model.a + model.b * u.grad_sq()) * std::exp(2.0 * sig);
    std::vector<double> lap = laplacian_stencil(g, w);
    std::vector<double> term(w.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) term[i] = stiff * lap[i];
    scale = std::max(scale, detail::weighted_norm(g, term));
    for (std::size_t i = 0; i < w.size(); ++i) term[i] = lambda * w[i];
    scale = std::max(scale, detail::weighted_norm(g, term));
    const double cp = std::exp(model.p * model.delta_p() * sig);
    for (std::size_t i = 0; i < w.size(); ++i)
        term[i] = cp * std::pow(std::fabs(w[i]), model.p - 1.0);
    scale = std::max(scale, detail::weighted_norm(g, term));
    if (model.mu > 0.0) {
        const double cq = model.mu * std::exp(model.q * model.delta_q() * sig);
        for (std::size_t i = 0; i < w.size(); ++i)
            term[i] = cq * std::pow(std::fabs(w[i]), model.q - 1.0);
        scale = std::max(scale, detail::weighted_norm(g, term));
    }
    return detail::weighted_norm(g, R) / scale;
}

// Multiplier minimizing the strong-form residual over lambda; independent of
// multiplier_estimate, which uses the quadrature norms only.
inline double least_squares_multiplier(const ModelParams& model, const RadialField& u) {
    const auto& g = u.grid();
    const auto& w = u.base_values();
    const std::vector<double> F = detail::strong_form(model, u);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        num += g.node_weight[i] * F[i] * w[i];
        den += g.node_weight[i] * w[i] * w[i];
    }
    return num / den;
}

namespace detail {

// Warm re-projection: bracket the requested derivative sign change around the
// previous root and bisect. want_dir = +1 locates the fiber minimum (P+),
// -1 the maximum (P-). Returns the shift plus the fiber value there.
struct FiberRoot {
    double s;
    double value;
    bool valid = false;
};

inline FiberRoot warm_fiber_root(const FiberParams& fp, double guess, int want_dir) {
    auto dpsi = [&](double s) { return eval_fiber_derivative(fp, s); };
    double half = 0.25;
    for (int k = 0; k < 12; ++k, half *= 2.0) {
        const double lo = guess - half, hi = guess + half;
        const double flo = dpsi(lo), fhi = dpsi(hi);
        const bool straddle = want_dir > 0 ? (flo < 0.0 && fhi > 0.0) : (flo > 0.0 && fhi < 0.0);
        if (straddle) {
            FiberRoot root;
            root.s = polish_root(fp, bisect(dpsi, lo, hi, kRootTolS), 1);
            // confirm branch by concavity
            const double d2 = eval_fiber_second_derivative(fp, root.s);
            if ((want_dir > 0 && d2 <= 0.0) || (want_dir < 0 && d2 >= 0.0)) return {};
            root.value = eval_fiber(fp, root.s);
            root.valid = true;
            return root;
        }
    }
    return {};
}

// Full-scan projection used at the start and the end of each solve.
inline FiberRoot full_fiber_root(const ModelParams& model, const FiberParams& fp, Branch branch) {
    const LandscapeReport rep = classify_fiber(fp);
    FiberRoot root;
    if (rep.kind == FiberKind::Unclassified) return root;
    if (branch == Branch::PPlus) {
        if (rep.kind != FiberKind::TwoCritical) return root;
        root.s = *rep.s_min;
        root.value = rep.value_at_min;
    } else {
        root.s = *rep.s_max;
        root.value = rep.value_at_max;
    }
    (void)model;
    root.valid = true;
    return root;
}

// 2nd-order staggered stiffness coefficients for the preconditioner.
inline std::vector<double> precond_stiffness(const RadialGrid& g) {
    std::vector<double> k(g.size() - 1);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double d = g.log_step * g.mid_radius[i];
        k[i] = g.mid_weight[i] / (d * d);
    }
    return k;
}

}  // namespace detail

namespace detail {

struct DescentState {
    std::vector<double> w;  // base samples, mass c
    double sigma = 0.0;     // dilation carried outside the grid
};

}  // namespace detail

// Descent on the reduced functional u -> E_mu(s*(u)) along the requested
// branch. Used by local_minimize (P+, with the A_{R0} escape guard) and
// mountain_pass (P-).
inline SolveResult reduced_descent(const ModelParams& model, const RadialField& u_init,
                                   Branch branch, const SolveOptions& opts = {},
                                   std::optional<double> well_radius = std::nullopt) {
    const auto grid = u_init.grid_ptr();
    const RadialGrid& g = *grid;
    const std::size_t n = g.size();
    const double dp = model.delta_p(), dq = model.delta_q();
    const double c2 = model.c * model.c;

    RadialField base = normalize_mass(
        RadialField(grid, u_init.base_values(), 0.0), model.c);
    double sigma = u_init.dilation_log();

    auto res_fail = [&](const std::string& why, int iters, double sig,
                        const RadialField& b) {
        SolveResult r{dilate(RadialField(grid, b.base_values(), 0.0), sig)};
        r.branch = branch;
        r.converged = false;
        r.iterations = iters;
        r.status = why;
        r.energy = energy(model, r.field);
        r.lambda = multiplier_estimate(model, r.field);
        r.pohozaev_residual =
            std::fabs(pohozaev(model, r.field)) / (model.a * r.field.grad_sq());
        return r;
    };

    // initial projection (full scan)
    {
        const auto root = detail::full_fiber_root(
            model, fiber_of(model, dilate(base, sigma)), branch);
        if (!root.valid) return res_fail("initial fiber projection failed", 0, sigma, base);
        sigma += root.s;
    }

    const std::vector<double> stiff_k = detail::precond_stiffness(g);
    std::vector<double> lap(n), grad(n), dir(n), sub(n - 1), diag(n), sup(n - 1);
    const double ratio0 = base.grad_norm() / model.c;
    const int want_dir = branch == Branch::PPlus ? +1 : -1;
    double J = eval_fiber(fiber_of(model, dilate(base, sigma)), 0.0);
    int it = 0;

    for (; it < opts.max_iterations; ++it) {
        const double e2s = std::exp(2.0 * sigma);
        const double g2 = e2s * base.grad_sq();
        const double lp = std::exp(model.p * dp * sigma) * base.lp_pow(model.p);
        const double lq = std::exp(model.q * dq * sigma) * base.lp_pow(model.q);
        const double E = 0.5 * model.a * g2 + 0.25 * model.b * g2 * g2 - lp / model.p -
                         model.mu * lq / model.q;
        const double P = model.a * g2 + model.b * g2 * g2 - model.mu * dq * lq - dp * lp;
        const double lambda =
            (model.a * g2 + model.b * g2 * g2 - model.mu * lq - lp) / c2;

        // pulled-back tangent gradient in the base frame
        const auto& w = base.base_values();
        lap = neg_laplacian_sbp(g, w);
        const double stiff = (model.a + model.b * g2) * e2s;
        const double cp = std::exp(model.p * dp * sigma);
        const double cq = model.mu * std::exp(model.q * dq * sigma);
        for (std::size_t i = 0; i < n; ++i)
            grad[i] = stiff * lap[i] - cp * std::pow(std::fabs(w[i]), model.p - 2.0) * w[i] -
                      cq * std::pow(std::fabs(w[i]), model.q - 2.0) * w[i] - lambda * w[i];

        // preconditioned direction: ((a + b g2) e2s L2 + kappa M) d = M grad.
        // The shift must dominate the discrete Laplacian's constant mode even
        // when lambda -> 0, so it is floored at a fraction of the quadratic
        // energy scale per unit mass.
        const double kappa =
            std::fabs(lambda) + 0.03 * (model.a * g2 + model.b * g2 * g2) / c2;
        for (std::size_t i = 0; i < n; ++i) {
            const double kl = i > 0 ? stiff_k[i - 1] : 0.0;
            const double kr = i + 1 < n ? stiff_k[i] : 0.0;
            diag[i] = stiff * (kl + kr) + kappa * g.node_weight[i];
            if (i + 1 < n) {
                sub[i] = -stiff * stiff_k[i];
                sup[i] = -stiff * stiff_k[i];
            }
        }
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = g.node_weight[i] * grad[i];
        dir = solve_tridiagonal(sub, diag, sup, rhs);
        double dd = 0.0;  // <grad, H^{-1} grad>: the achievable energy decrease
        for (std::size_t i = 0; i < n; ++i) dd += g.node_weight[i] * grad[i] * dir[i];
        const double stationarity = std::max(dd, 0.0) / (1.0 + std::fabs(E));
        if (opts.trace) opts.trace(it, J, sigma, stationarity);

        if (stationarity <= opts.grad_tol &&
            std::fabs(P) <= opts.pohozaev_tol * model.a * g2) {
            // final validation with the full classification
            const auto root = detail::full_fiber_root(
                model, fiber_of(model, dilate(base, sigma)), branch);
            if (!root.valid)
                return res_fail("converged point failed final classification", it, sigma, base);
            SolveResult res{dilate(base, sigma + root.s)};
            res.branch = branch;
            res.converged = true;
            res.iterations = it;
            res.status = "ok";
            res.energy = energy(model, res.field);
            res.lambda = multiplier_estimate(model, res.field);
            res.pohozaev_residual =
                std::fabs(pohozaev(model, res.field)) / (model.a * res.field.grad_sq());
            res.grad_residual = stationarity;
            return res;
        }
        if (!(dd > 0.0))
            return res_fail("preconditioner produced a non-descent direction", it, sigma, base);

        if (branch == Branch::PPlus && well_radius) {
            const double rho = *well_radius / 100.0;
            if (std::sqrt(g2) >= *well_radius - rho)
                return res_fail("iterate reached the boundary of the local well A_R0", it,
                                sigma, base);
        }

        // backtracking on the reduced functional; once the predicted decrease
        // falls below the floating-point resolution of J, accept on simple
        // non-increase so the gradient can keep contracting
        double tau = 1.0;
        bool accepted = false;
        const double j_resolution = 8.0 * 2.2e-16 * (1.0 + std::fabs(J));
        const double ratio_now = base.grad_norm() / model.c;
        for (int bt = 0; bt < opts.max_backtracks; ++bt, tau *= 0.5) {
            std::vector<double> wtry(n);
            for (std::size_t i = 0; i < n; ++i) wtry[i] = w[i] - tau * dir[i];
            RadialField btry(grid, std::move(wtry), 0.0);
            if (!(btry.mass_norm() > 0.0)) continue;
            btry = normalize_mass(btry, model.c);
            // profile integrity: a step must not reshape the base profile by
            // more than one scale decade at once
            const double rtry = btry.grad_norm() / model.c;
            if (rtry > 10.0 * ratio_now || rtry < 0.1 * ratio_now) continue;
            const auto root =
                detail::warm_fiber_root(fiber_of(model, dilate(btry, sigma)), 0.0, want_dir);
            if (!root.valid) continue;  // unclassified or wrong concavity: reject the step
            const double required = std::max(opts.armijo * tau * dd, 0.0);
            if (root.value <= J - required || (required <= j_resolution && root.value <= J + j_resolution)) {
                base = std::move(btry);
                sigma += root.s;
                J = root.value;
                accepted = true;
                break;
            }
        }
        if (!accepted) return res_fail("line search stalled", it, sigma, base);

        // keep the base profile at unit scale: shift drifts into sigma. The
        // resample clamps outside the grid, so one re-centering moves at most
        // two decades; larger drifts take several passes.
        const double ratio = base.grad_norm() / model.c;
        if (ratio > 8.0 * ratio0 || ratio < 0.125 * ratio0) {
            const double shift = std::clamp(std::log(ratio0 / ratio), -2.1, 2.1);
            base = normalize_mass(materialize(dilate(base, shift)), model.c);
            sigma -= shift;
            const auto root = detail::full_fiber_root(
                model, fiber_of(model, dilate(base, sigma)), branch);
            if (!root.valid) return res_fail("re-centering broke the projection", it, sigma, base);
            sigma += root.s;
            J = root.value;
        }
    }
    return res_fail("max iterations reached", it, sigma, base);
}

// ---------------------------------------------------------------------------
// Branch front ends
// ---------------------------------------------------------------------------

inline RadialField gaussian_init(double c, double width = 1.0,
                                 std::shared_ptr<const RadialGrid> grid = RadialGrid::standard()) {
    RadialField u = make_field(std::move(grid),
                               [width](double r) { return std::exp(-(r / width) * (r / width)); });
    return normalize_mass(u, c);
}

// Local minimizer in A_{R0} (mixed regime, mu below both thresholds).
inline SolveResult local_minimize(const ModelParams& model, const ConstantsBundle& constants,
                                  const RadialField& u_init, const SolveOptions& opts = {}) {
    if (!model.mixed())
        throw std::invalid_argument("local_minimize: requires the mixed regime");
    const double lim = constants.mixed_mu_limit();
    if (!(model.mu > 0.0) || !(model.mu < lim))
        throw std::invalid_argument("local_minimize: requires 0 < mu < " + std::to_string(lim));
    const BarrierCurve bar = barrier(model, constants);
    return reduced_descent(model, u_init, Branch::PPlus, opts, bar.R0);
}

// Mountain-pass point via the reduced min-max (P- branch).
inline SolveResult mountain_pass(const ModelParams& model, const ConstantsBundle& constants,
                                 const RadialField& u_init, const SolveOptions& opts = {}) {
    if (model.regime == Regime::MixedCritical)
        throw std::invalid_argument(
            "mountain_pass: not available for q < 10/3, p = 6 (no second critical point known)");
    if (model.regime == Regime::Mixed) {
        const double lim = constants.mixed_mu_limit();
        if (!(model.mu < lim))
            throw std::invalid_argument("mountain_pass: mixed regime requires mu < " +
                                        std::to_string(lim));
    }
    return reduced_descent(model, u_init, Branch::PMinus, opts);
}

// Three radially decreasing initializers: a unit Gaussian and two cutoff
// instanton bumps. The minimum converged energy is reported.
inline SolveResult mountain_pass_multistart(const ModelParams& model,
                                            const ConstantsBundle& constants,
                                            const SolveOptions& opts = {},
                                            std::shared_ptr<const RadialGrid> grid =
                                                RadialGrid::standard()) {
    std::vector<RadialField> inits;
    inits.push_back(gaussian_init(model.c, 1.0, grid));
    inits.push_back(instanton(0.3, model.c, grid).v_norm);
    inits.push_back(instanton(0.1, model.c, grid).v_norm);
    std::optional<SolveResult> best;
    std::string failures;
    for (const auto& u0 : inits) {
        SolveResult r = mountain_pass(model, constants, u0, opts);
        if (r.converged && (!best || r.energy < best->energy)) best = std::move(r);
        else if (!r.converged) failures += (failures.empty() ? "" : "; ") + r.status;
    }
    if (!best) {
        SolveResult r{gaussian_init(model.c, 1.0, grid)};
        r.converged = false;
        r.status = "all starts failed: " + failures;
        return r;
    }
    return *best;
}

// ---------------------------------------------------------------------------
// mu sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    double mu = 0.0;
    std::optional<double> m_local;
    std::optional<double> sigma_mp;
    std::optional<double> grad_norm_local;
    std::optional<double> l6_norm6;
    std::optional<double> lambda_local;
    std::optional<double> lambda_mp;
    std::string error;
};

// One row per mu (sorted decreasing), warm-starting each solve from the
// previous solution. Solve failures are recorded in the row and the sweep
// continues.
inline std::vector<SweepRow> mu_sweep(const ModelParams& model_template,
                                      const std::vector<double>& mu_values, Branch branch,
                                      const ConstantsBundle& constants,
                                      const SolveOptions& opts = {},
                                      std::shared_ptr<const RadialGrid> grid =
                                          RadialGrid::standard()) {
    for (std::size_t i = 1; i < mu_values.size(); ++i)
        if (!(mu_values[i] < mu_values[i - 1]))
            throw std::invalid_argument("mu_sweep: mu values must be strictly decreasing");
    std::vector<SweepRow> rows;
    std::optional<RadialField> warm;
    for (double mu : mu_values) {
        SweepRow row;
        row.mu = mu;
        try {
            const ModelParams m = ModelParams::make(model_template.a, model_template.b,
                                                    model_template.c, mu, model_template.p,
                                                    model_template.q);
            SolveResult r =
                branch == Branch::PPlus
                    ? local_minimize(m, constants, warm ? *warm : gaussian_init(m.c, 1.0, grid),
                                     opts)
                    : (warm ? mountain_pass(m, constants, *warm, opts)
                            : mountain_pass_multistart(m, constants, opts, grid));
            if (!r.converged) {
                row.error = r.status;
            } else {
                warm = r.field;
                if (branch == Branch::PPlus) {
                    row.m_local = r.energy;
                    row.grad_norm_local = r.field.grad_norm();
                    row.lambda_local = r.lambda;
                } else {
                    row.sigma_mp = r.energy;
                    row.lambda_mp = r.lambda;
                }
                if (m.sobolev_critical()) row.l6_norm6 = r.field.lp_pow(6.0);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace kirchhoff
