#pragma once

// Model parameters and the closed-form constants of the problem
//
//   -(a + b||grad u||_2^2) Lap(u) = lambda u + |u|^{p-2}u + mu |u|^{q-2}u on R^3,
//   ||u||_2 = c,
//
// namely the scaling exponents delta_p, the thresholds mu_star_upper /
// mu_star_lower / mu_double_star, the constant Lambda solving
// Lambda^2 = a*S + b*S^2*Lambda, and the critical energy level
// a*S*Lambda/3 + b*S^2*Lambda^2/12.  The Sobolev and Gagliardo-Nirenberg
// constants feeding these formulas are computed in groundstate.hpp.

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "kirchhoff/numerics.hpp"

namespace kirchhoff {

// Guard band for the open-interval exponent hypotheses. Boundary exponents
// are rejected rather than snapped.
inline constexpr double kRegimeGuard = 1e-12;

inline constexpr double kMassCritical = 14.0 / 3.0;   // p delta_p = 4
inline constexpr double kLowerStructural = 10.0 / 3.0;  // q delta_q = 2

// delta_p = 3(p-2)/(2p), the L^2-scaling exponent of the t^{p delta_p} term.
inline double delta_exponent(double p) {
    if (!(p > 2.0 + kRegimeGuard) || !(p <= 6.0))
        throw std::invalid_argument("delta_exponent: p must lie in (2, 6], got " + std::to_string(p));
    return 3.0 * (p - 2.0) / (2.0 * p);
}

struct ExponentPair {
    double p;
    double delta_p;

    explicit ExponentPair(double p_) : p(p_), delta_p(delta_exponent(p_)) {}
    double scaled() const { return p * delta_p; }  // = 3(p-2)/2
};

enum class Regime {
    Mixed,                  // 2 < q < 10/3 < 14/3 < p < 6
    MixedCritical,          // 2 < q < 10/3, p = 6
    Supercritical,          // 14/3 < q < p < 6
    SupercriticalCritical,  // 14/3 < q < 6, p = 6
    MuZero,                 // mu = 0, 14/3 < p <= 6
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Mixed: return "mixed";
        case Regime::MixedCritical: return "mixed-critical";
        case Regime::Supercritical: return "supercritical";
        case Regime::SupercriticalCritical: return "supercritical-critical";
        case Regime::MuZero: return "mu-zero";
    }
    return "?";
}

inline Regime infer_regime(double p, double q, double mu) {
    const bool p_critical = (p == 6.0);
    if (mu == 0.0) {
        if (!(p > kMassCritical + kRegimeGuard))
            throw std::invalid_argument("infer_regime: mu = 0 requires 14/3 < p <= 6");
        return Regime::MuZero;
    }
    if (q < kLowerStructural - kRegimeGuard && p > kMassCritical + kRegimeGuard)
        return p_critical ? Regime::MixedCritical : Regime::Mixed;
    if (q > kMassCritical + kRegimeGuard)
        return p_critical ? Regime::SupercriticalCritical : Regime::Supercritical;
    throw std::invalid_argument("infer_regime: exponents (p, q) outside the covered regimes");
}

struct ModelParams {
    double a = 1.0;   // local stiffness
    double b = 1.0;   // nonlocal (Kirchhoff) stiffness
    double c = 1.0;   // prescribed mass ||u||_2
    double mu = 0.0;  // weight of the |u|^{q-2}u term
    double p = 5.0;
    double q = 3.0;
    Regime regime = Regime::Mixed;

    static ModelParams make(double a, double b, double c, double mu, double p, double q) {
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
            throw std::invalid_argument("ModelParams: a, b, c must be positive");
        if (!(mu >= 0.0)) throw std::invalid_argument("ModelParams: mu must be >= 0");
        if (!(q > 2.0 + kRegimeGuard) || !(q < 6.0 - kRegimeGuard))
            throw std::invalid_argument("ModelParams: q must lie in (2, 6)");
        if (!(p <= 6.0) || !(p > q + kRegimeGuard))
            throw std::invalid_argument("ModelParams: need q < p <= 6");
        ModelParams m{a, b, c, mu, p, q, infer_regime(p, q, mu)};
        return m;
    }

    double delta_p() const { return delta_exponent(p); }
    double delta_q() const { return delta_exponent(q); }
    bool sobolev_critical() const { return p == 6.0; }
    bool mixed() const { return regime == Regime::Mixed || regime == Regime::MixedCritical; }
};

// ---------------------------------------------------------------------------
// Closed-form constants
// ---------------------------------------------------------------------------

// Lambda = b S^2/2 + sqrt(a S + b^2 S^4 / 4); the positive root of
// Lambda^2 = a S + b S^2 Lambda.
inline double lambda_big(double a, double b, double sobolev_S) {
    const double s2 = sobolev_S * sobolev_S;
    return 0.5 * b * s2 + std::sqrt(a * sobolev_S + 0.25 * b * b * s2 * s2);
}

// a S Lambda / 3 + b S^2 Lambda^2 / 12, the compactness threshold at p = 6.
inline double critical_energy_level(double a, double b, double sobolev_S) {
    const double lam = lambda_big(a, b, sobolev_S);
    return a * sobolev_S * lam / 3.0 + b * sobolev_S * sobolev_S * lam * lam / 12.0;
}

// C_{p,q} = K^{(4-qt)/(pt-4)} - K^{(pt-qt)/(pt-4)} with
// K = 8(4-qt) / (pt (pt-2)(pt-qt)), evaluated on the scaled exponents
// pt = p delta_p, qt = q delta_q.
inline double c_pq_constant(double pt, double qt) {
    if (!(pt > 4.0) || !(qt < 2.0) || !(qt > 0.0))
        throw std::invalid_argument("c_pq_constant: need qt in (0,2) and pt > 4");
    const double logK = std::log(8.0 * (4.0 - qt)) - std::log(pt * (pt - 2.0) * (pt - qt));
    return std::exp(logK * (4.0 - qt) / (pt - 4.0)) - std::exp(logK * (pt - qt) / (pt - 4.0));
}

namespace detail {

// Threshold formulas as sums of exponent*log terms; the c exponents can be
// large near pt = 4, so everything stays in log space until the end.
inline double mu_star_upper_impl(double a, double b, double c, double p, double q,
                                 double gn_p, double gn_q) {
    const double dp = delta_exponent(p), dq = delta_exponent(q);
    const double pt = p * dp, qt = q * dq;
    const double log_c = std::log(c);
    const double log_Cp_p = p * std::log(gn_p);  // log(C_p^p)
    const double log_Cq_q = q * std::log(gn_q);

    // (a/2) (bp / (4 C_p^p))^{(2-qt)/(pt-4)} / c^{q(1-dq) + p(1-dp)(2-qt)/(pt-4)}
    const double t1 = std::log(0.5 * a) +
                      (2.0 - qt) / (pt - 4.0) * (std::log(0.25 * b * p) - log_Cp_p) -
                      (q * (1.0 - dq) + p * (1.0 - dp) * (2.0 - qt) / (pt - 4.0)) * log_c;
    // (b/4)^{(pt-qt)/(pt-4)} (p / C_p^p)^{(4-qt)/(pt-4)} / c^{q(1-dq) + p(1-dp)(4-qt)/(pt-4)}
    const double t2 = (pt - qt) / (pt - 4.0) * std::log(0.25 * b) +
                      (4.0 - qt) / (pt - 4.0) * (std::log(p) - log_Cp_p) -
                      (q * (1.0 - dq) + p * (1.0 - dp) * (4.0 - qt) / (pt - 4.0)) * log_c;

    const double m = std::max(t1, t2);
    const double bracket = std::exp(m) * (std::exp(t1 - m) + std::exp(t2 - m));
    return bracket * q * c_pq_constant(pt, qt) * std::exp(-log_Cq_q);
}

inline double mu_star_lower_impl(double a, double b, double c, double p, double q,
                                 double gn_p, double gn_q) {
    (void)a;
    const double dp = delta_exponent(p), dq = delta_exponent(q);
    const double pt = p * dp, qt = q * dq;
    const double log_Cp_p = p * std::log(gn_p);
    const double log_Cq_q = q * std::log(gn_q);
    const double log_lead = std::log(q * (pt - 4.0) * b) - std::log(4.0 * (pt - qt)) - log_Cq_q;
    const double log_pow =
        (4.0 - qt) / (pt - 4.0) *
        (std::log(p * (4.0 - qt) * b) - std::log(4.0 * (pt - qt)) - log_Cp_p);
    const double c_exp = q * (1.0 - dq) + p * (1.0 - dp) * (4.0 - qt) / (pt - 4.0);
    return std::exp(log_lead + log_pow - c_exp * std::log(c));
}

inline double mu_double_star_impl(double a, double b, double c, double q, double gn_q,
                                  double sobolev_S) {
    const double dq = delta_exponent(q);
    const double qt = q * dq;
    const double level = critical_energy_level(a, b, sobolev_S);
    const double log_val = std::log(2.0) + (qt / 4.0) * std::log(b / dq) -
                           std::log((6.0 - qt) * std::pow(gn_q, q)) +
                           (1.0 - qt / 4.0) * std::log(12.0 * q / (4.0 - qt) * level) -
                           q * (1.0 - dq) * std::log(c);
    return std::exp(log_val);
}

}  // namespace detail

// Every closed-form constant evaluated for one model. Thresholds are only
// defined in the mixed regime (and mu_double_star only for p = 6); absent
// entries stay disengaged.
struct ConstantsBundle {
    double sobolev_S = 0.0;
    std::map<double, double> gn_C;  // exponent -> GN constant C_p
    double lambda_big = 0.0;
    double critical_energy = 0.0;
    std::optional<double> mu_star_upper;   // convex-concave geometry bound
    std::optional<double> mu_star_lower;   // natural-constraint bound
    std::optional<double> mu_double_star;  // p = 6 compactness bound
    std::optional<double> c_pq;

    double gn(double p) const {
        auto it = gn_C.find(p);
        if (it == gn_C.end())
            throw std::invalid_argument("ConstantsBundle: no GN constant stored for p = " +
                                        std::to_string(p));
        return it->second;
    }

    // min{mu_star_lower, mu_star_upper} (and mu_double_star when present):
    // below this the mixed regime has its full two-critical-point structure.
    double mixed_mu_limit() const {
        if (!mu_star_upper || !mu_star_lower)
            throw std::invalid_argument("ConstantsBundle: thresholds undefined outside the mixed regime");
        double lim = std::min(*mu_star_upper, *mu_star_lower);
        if (mu_double_star) lim = std::min(lim, *mu_double_star);
        return lim;
    }
};

// Assembles the bundle from precomputed embedding constants. gn_p / gn_q are
// the GN constants for the model's exponents (gn_p is ignored at p = 6, where
// C_6 = S^{-1/2} by definition).
inline ConstantsBundle thresholds(const ModelParams& model, double sobolev_S, double gn_p,
                                  double gn_q) {
    if (!(sobolev_S > 0.0) || !(gn_q > 0.0))
        throw std::invalid_argument("thresholds: embedding constants must be positive");
    ConstantsBundle out;
    out.sobolev_S = sobolev_S;
    const double cp = model.sobolev_critical() ? 1.0 / std::sqrt(sobolev_S) : gn_p;
    if (!(cp > 0.0)) throw std::invalid_argument("thresholds: gn_p must be positive");
    out.gn_C[model.p] = cp;
    out.gn_C[model.q] = gn_q;
    out.lambda_big = lambda_big(model.a, model.b, sobolev_S);
    out.critical_energy = critical_energy_level(model.a, model.b, sobolev_S);
    if (model.mixed()) {
        out.c_pq = c_pq_constant(model.p * model.delta_p(), model.q * model.delta_q());
        out.mu_star_upper =
            detail::mu_star_upper_impl(model.a, model.b, model.c, model.p, model.q, cp, gn_q);
        out.mu_star_lower =
            detail::mu_star_lower_impl(model.a, model.b, model.c, model.p, model.q, cp, gn_q);
        if (model.sobolev_critical())
            out.mu_double_star =
                detail::mu_double_star_impl(model.a, model.b, model.c, model.q, gn_q, sobolev_S);
    }
    return out;
}

}  // namespace kirchhoff
