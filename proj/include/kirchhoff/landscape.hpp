#pragma once

// Scalar landscape analysis of the fiber map
//
//   Psi(s) = t2 e^{2s} + t4 e^{4s} - tp e^{pt s} - tq e^{qt s},
//
// the energy along the mass-preserving dilation of a field. Locates critical
// points and zeros in the mixed regime (qt < 2 < 4 < pt: one negative local
// minimum, one positive global maximum) and the purely supercritical regime
// (4 < qt < pt: a unique positive maximum), and builds the barrier function h
// whose zeros R0 < R1 bound the local-minimization well.

#include <cmath>
#include <limits>
#include <optional>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/numerics.hpp"

namespace kirchhoff {

// Coefficients and exponents of one fiber map. For a field u of a model
// (a, b, mu, p, q):
//   t2_coef = (a/2)||grad u||_2^2     t4_coef = (b/4)||grad u||_2^4
//   tp_coef = ||u||_p^p / p           tq_coef = mu ||u||_q^q / q
//   p_exp = p delta_p                 q_exp = q delta_q
struct FiberParams {
    double t2_coef = 0.0;
    double t4_coef = 0.0;
    double tp_coef = 0.0;
    double tq_coef = 0.0;
    double p_exp = 0.0;
    double q_exp = 0.0;

    bool mixed_shape() const {
        return tq_coef > 0.0 && tp_coef > 0.0 && q_exp < 2.0 && p_exp > 4.0;
    }
    bool supercritical_shape() const {
        if (tp_coef + tq_coef <= 0.0 || t4_coef <= 0.0) return false;
        if (tp_coef > 0.0 && !(p_exp > 4.0)) return false;
        if (tq_coef > 0.0 && !(q_exp > 4.0)) return false;
        return true;
    }
};

namespace detail {

// One evaluation of sum_k sign_k coef_k e^{rate_k s} with saturation: once the
// dominant exponent exceeds ~700 the result is +-inf with the dominant sign.
inline double fiber_sum(const FiberParams& fp, double s, int derivative_order) {
    struct Term {
        double coef, rate, sign;
    };
    const Term terms[4] = {{fp.t2_coef, 2.0, +1.0},
                           {fp.t4_coef, 4.0, +1.0},
                           {fp.tp_coef, fp.p_exp, -1.0},
                           {fp.tq_coef, fp.q_exp, -1.0}};
    double log_mag[4];
    double weight[4];
    double max_log = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        double c = terms[k].coef;
        for (int d = 0; d < derivative_order; ++d) c *= terms[k].rate;
        weight[k] = terms[k].sign;
        log_mag[k] = c > 0.0 ? std::log(c) + terms[k].rate * s
                             : -std::numeric_limits<double>::infinity();
        max_log = std::max(max_log, log_mag[k]);
    }
    if (max_log == -std::numeric_limits<double>::infinity()) return 0.0;
    double acc = 0.0;
    for (int k = 0; k < 4; ++k)
        if (std::isfinite(log_mag[k])) acc += weight[k] * std::exp(log_mag[k] - max_log);
    if (max_log > 700.0)
        return acc >= 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    return acc * std::exp(max_log);
}

}  // namespace detail

// Psi(s)
inline double eval_fiber(const FiberParams& fp, double s) { return detail::fiber_sum(fp, s, 0); }

// Psi'(s) = P_mu(s * u) when fp comes from a field u.
inline double eval_fiber_derivative(const FiberParams& fp, double s) {
    return detail::fiber_sum(fp, s, 1);
}

// Psi''(s); its sign at a critical point separates the P+ and P- branches.
inline double eval_fiber_second_derivative(const FiberParams& fp, double s) {
    return detail::fiber_sum(fp, s, 2);
}

enum class FiberKind { TwoCritical, UniqueMax, Unclassified };

inline const char* fiber_kind_name(FiberKind k) {
    switch (k) {
        case FiberKind::TwoCritical: return "two-critical";
        case FiberKind::UniqueMax: return "unique-max";
        case FiberKind::Unclassified: return "unclassified";
    }
    return "?";
}

struct LandscapeReport {
    FiberKind kind = FiberKind::Unclassified;
    std::optional<double> s_min;    // local minimum location s_u
    std::optional<double> s_max;    // maximum location t_u
    std::optional<double> zero_lo;  // first zero c_u
    std::optional<double> zero_hi;  // second zero d_u
    double value_at_min = std::numeric_limits<double>::quiet_NaN();
    double value_at_max = std::numeric_limits<double>::quiet_NaN();
    // Value of the sufficient-condition bracket (> 1 guarantees the
    // two-critical-point structure); recorded for mixed fibers only.
    std::optional<double> mixed_condition;
};

// Scan window and resolution for the derivative sign-change search. The
// bisection then tightens each bracket to kRootTolS.
inline constexpr double kScanLo = -40.0;
inline constexpr double kScanHi = 40.0;
inline constexpr int kScanPoints = 20001;
inline constexpr double kRootTolS = 1e-12;
// Nearly coalescent critical points are reported as Unclassified: the
// disjoint-branch guarantee fails at the threshold where they merge.
inline constexpr double kCoalescenceGuard = 1e-10;

// Sufficient-condition bracket for the mixed two-critical structure:
// C_{p,q}(pt,qt) * [ (t2/tq)(t4/tp)^{(2-qt)/(pt-4)}
// + (1/tq) t4^{(pt-qt)/(pt-4)} / tp^{(4-qt)/(pt-4)} ], guaranteeing the
// negative minimum / positive maximum profile when it exceeds 1.
inline double mixed_sufficiency(const FiberParams& fp) {
    if (!fp.mixed_shape())
        throw std::invalid_argument("mixed_sufficiency: fiber is not of mixed shape");
    const double pt = fp.p_exp, qt = fp.q_exp;
    const double l4 = std::log(fp.t4_coef), lp = std::log(fp.tp_coef), lq = std::log(fp.tq_coef);
    double term1 = 0.0;
    if (fp.t2_coef > 0.0)
        term1 = std::exp(std::log(fp.t2_coef) - lq + (2.0 - qt) / (pt - 4.0) * (l4 - lp));
    const double term2 =
        std::exp(-lq + (pt - qt) / (pt - 4.0) * l4 - (4.0 - qt) / (pt - 4.0) * lp);
    return c_pq_constant(pt, qt) * (term1 + term2);
}

namespace detail {

// Newton polish after bisection. The fiber terms can exceed the residual
// target by 15 orders of magnitude, so the root is driven to floating-point
// convergence rather than left at the bisection tolerance.
inline double polish_root(const FiberParams& fp, double s, int order) {
    for (int k = 0; k < 4; ++k) {
        const double f = fiber_sum(fp, s, order);
        const double df = fiber_sum(fp, s, order + 1);
        if (df == 0.0 || !std::isfinite(df)) break;
        const double step = f / df;
        if (!(std::fabs(step) < 1e-9)) break;  // only trust Newton very close in
        s -= step;
        if (std::fabs(step) < 1e-17 * (1.0 + std::fabs(s))) break;
    }
    return s;
}

inline std::optional<double> refine_root(const FiberParams& fp, const SignChange& br,
                                         int order) {
    auto f = [&](double s) { return fiber_sum(fp, s, order); };
    return polish_root(fp, bisect(f, br.lo, br.hi, kRootTolS), order);
}

// Second zero of Psi beyond the maximum: Psi is strictly decreasing there, so
// step-double until the value goes negative, then bisect.
inline std::optional<double> upper_zero(const FiberParams& fp, double s_max) {
    double lo = s_max;
    double step = 1.0;
    for (int k = 0; k < 64; ++k) {
        const double hi = lo + step;
        if (eval_fiber(fp, hi) < 0.0)
            return polish_root(
                fp, bisect([&](double s) { return eval_fiber(fp, s); }, lo, hi, kRootTolS), 0);
        lo = hi;
        step *= 2.0;
    }
    return std::nullopt;
}

}  // namespace detail

// Classification in the mixed regime qt < 2 < 4 < pt. Returns TwoCritical
// with s_u < c_u < t_u < d_u when the derivative shows the negative-positive-
// negative pattern; a fiber with tq_coef = 0 degenerates to UniqueMax.
inline LandscapeReport classify_mixed(const FiberParams& fp) {
    if (!(fp.q_exp < 2.0) || !(fp.p_exp > 4.0) || !(fp.tp_coef > 0.0) || fp.tq_coef < 0.0)
        throw std::invalid_argument("classify_mixed: fiber is not in the mixed regime");
    LandscapeReport rep;
    if (fp.tq_coef > 0.0) rep.mixed_condition = mixed_sufficiency(fp);

    auto dpsi = [&](double s) { return eval_fiber_derivative(fp, s); };
    const auto brackets = scan_sign_changes(dpsi, kScanLo, kScanHi, kScanPoints);

    if (fp.tq_coef == 0.0) {
        // No low-exponent term: Psi rises from 0+ to a single positive maximum.
        if (brackets.size() != 1 || brackets[0].direction != -1) return rep;
        rep.s_max = detail::refine_root(fp, brackets[0], 1);
        rep.value_at_max = eval_fiber(fp, *rep.s_max);
        rep.kind = FiberKind::UniqueMax;
        return rep;
    }
    if (brackets.size() != 2) return rep;  // 0 changes: monotone decrease; odd: grazing
    if (brackets[0].direction != +1 || brackets[1].direction != -1) return rep;

    const auto s_u = detail::refine_root(fp, brackets[0], 1);
    const auto t_u = detail::refine_root(fp, brackets[1], 1);
    if (!s_u || !t_u || *t_u - *s_u < kCoalescenceGuard) return rep;
    const double v_min = eval_fiber(fp, *s_u);
    const double v_max = eval_fiber(fp, *t_u);
    if (!(v_min < 0.0) || !(v_max > 0.0)) return rep;

    const auto c_u = detail::refine_root(
        fp, SignChange{*s_u, *t_u, +1}, 0);
    const auto d_u = detail::upper_zero(fp, *t_u);
    if (!c_u || !d_u) return rep;

    rep.kind = FiberKind::TwoCritical;
    rep.s_min = s_u;
    rep.s_max = t_u;
    rep.zero_lo = c_u;
    rep.zero_hi = d_u;
    rep.value_at_min = v_min;
    rep.value_at_max = v_max;
    return rep;
}

// Classification for 4 < qt < pt (terms with zero coefficient are exempt):
// the fiber has a unique maximum at a positive level.
inline LandscapeReport classify_supercritical(const FiberParams& fp) {
    if (!fp.supercritical_shape())
        throw std::invalid_argument("classify_supercritical: fiber is not purely supercritical");
    LandscapeReport rep;
    auto dpsi = [&](double s) { return eval_fiber_derivative(fp, s); };
    const auto brackets = scan_sign_changes(dpsi, kScanLo, kScanHi, kScanPoints);
    if (brackets.size() != 1 || brackets[0].direction != -1) return rep;
    rep.s_max = detail::refine_root(fp, brackets[0], 1);
    rep.value_at_max = eval_fiber(fp, *rep.s_max);
    if (!(rep.value_at_max > 0.0)) return LandscapeReport{};
    rep.kind = FiberKind::UniqueMax;
    return rep;
}

// Dispatch on the active exponents of the fiber.
inline LandscapeReport classify_fiber(const FiberParams& fp) {
    if (fp.tp_coef > 0.0 && fp.p_exp > 4.0 && fp.q_exp < 2.0 && fp.tq_coef >= 0.0)
        return classify_mixed(fp);
    if (fp.supercritical_shape()) return classify_supercritical(fp);
    return LandscapeReport{};
}

// ---------------------------------------------------------------------------
// Barrier curve
// ---------------------------------------------------------------------------

// h(t) = (a/2)t^2 + (b/4)t^4 - (C_p^p/p) c^{p(1-dp)} t^{p dp}
//        - (mu C_q^q/q) c^{q(1-dq)} t^{q dq}, a lower bound for the energy in
// terms of t = ||grad u||_2. Its zeros R0 < R1 delimit the region where the
// energy is forced positive.
struct BarrierCurve {
    ModelParams model;
    FiberParams shape;
    double R0 = 0.0;
    double R1 = 0.0;
    double peak_radius = 0.0;  // argmax of h in t
    double peak_value = 0.0;

    double operator()(double t) const { return eval_fiber(shape, std::log(t)); }
};

inline BarrierCurve barrier(const ModelParams& model, const ConstantsBundle& constants) {
    if (!model.mixed())
        throw std::invalid_argument("barrier: defined for the mixed regime only");
    if (!constants.mu_star_upper || !(model.mu < *constants.mu_star_upper))
        throw std::invalid_argument("barrier: requires 0 < mu < mu_star_upper");
    if (!(model.mu > 0.0)) throw std::invalid_argument("barrier: requires mu > 0");

    const double dp = model.delta_p(), dq = model.delta_q();
    FiberParams fp;
    fp.t2_coef = 0.5 * model.a;
    fp.t4_coef = 0.25 * model.b;
    fp.tp_coef = std::pow(constants.gn(model.p), model.p) *
                 std::pow(model.c, model.p * (1.0 - dp)) / model.p;
    fp.tq_coef = model.mu * std::pow(constants.gn(model.q), model.q) *
                 std::pow(model.c, model.q * (1.0 - dq)) / model.q;
    fp.p_exp = model.p * dp;
    fp.q_exp = model.q * dq;

    const LandscapeReport rep = classify_mixed(fp);
    if (rep.kind != FiberKind::TwoCritical)
        throw std::runtime_error("barrier: root bracketing failed (fiber not two-critical)");
    BarrierCurve out;
    out.model = model;
    out.shape = fp;
    out.R0 = std::exp(*rep.zero_lo);
    out.R1 = std::exp(*rep.zero_hi);
    out.peak_radius = std::exp(*rep.s_max);
    out.peak_value = rep.value_at_max;
    return out;
}

}  // namespace kirchhoff
