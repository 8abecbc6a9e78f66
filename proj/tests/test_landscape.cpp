#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kirchhoff/landscape.hpp"

using namespace kirchhoff;

namespace {

// Brute-force oracle: count sign changes of the fiber derivative on a dense
// uniform grid in s.
int derivative_sign_changes(const FiberParams& fp, double lo = -40.0, double hi = 40.0,
                            int n = 100000) {
    int changes = 0;
    double prev = 0.0;
    bool have_prev = false;
    for (int i = 0; i < n; ++i) {
        const double s = lo + (hi - lo) * i / (n - 1);
        const double d = eval_fiber_derivative(fp, s);
        if (d == 0.0) continue;
        if (have_prev && (d > 0.0) != (prev > 0.0)) ++changes;
        prev = d;
        have_prev = true;
    }
    return changes;
}

FiberParams mixed_fp(double a2, double b4, double cp, double dq, double pe, double qe) {
    FiberParams fp;
    fp.t2_coef = a2;
    fp.t4_coef = b4;
    fp.tp_coef = cp;
    fp.tq_coef = dq;
    fp.p_exp = pe;
    fp.q_exp = qe;
    return fp;
}

}  // namespace

TEST_CASE("fiber evaluation at s = 0 and asymptotics") {
    FiberParams fp = mixed_fp(1.0, 1.0, 1.0, 0.0, 6.0, 1.0);
    CHECK(eval_fiber(fp, 0.0) == doctest::Approx(1.0).epsilon(1e-15));

    fp = mixed_fp(0.7, 0.3, 0.2, 0.4, 5.0, 1.2);
    CHECK(eval_fiber(fp, 0.0) == doctest::Approx(0.7 + 0.3 - 0.2 - 0.4).epsilon(1e-14));

    // with tq_coef > 0 and q_exp smallest, Psi -> 0^- as s -> -infinity
    const double far = eval_fiber(fp, -30.0);
    CHECK(far < 0.0);
    CHECK(std::fabs(far) < 1e-10);

    // saturation rather than overflow for huge s
    CHECK(eval_fiber(fp, 400.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("fiber derivative matches a central finite difference") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coef(0.1, 10.0);
    std::uniform_real_distribution<double> pe(4.3, 6.0), qe(0.3, 1.8), sd(-1.5, 1.5);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const FiberParams fp = mixed_fp(coef(rng), coef(rng), coef(rng), coef(rng), pe(rng), qe(rng));
        const double s = sd(rng);
        const double an = eval_fiber_derivative(fp, s);
        const double fd = (eval_fiber(fp, s + h) - eval_fiber(fp, s - h)) / (2.0 * h);
        const double scale = std::max(std::fabs(an), 1e-8 * std::fabs(eval_fiber(fp, s)));
        CHECK(std::fabs(fd - an) <= 1e-6 * std::max(scale, 1e-12));
    }
    // no nonlinear terms: derivative positive everywhere
    const FiberParams fp = mixed_fp(1.0, 2.0, 0.0, 0.0, 5.0, 1.0);
    for (double s = -20.0; s <= 20.0; s += 0.5) CHECK(eval_fiber_derivative(fp, s) > 0.0);
}

TEST_CASE("classify_mixed: two-critical structure with small nonlinear terms") {
    const FiberParams fp = mixed_fp(1.0, 1.0, 1e-3, 1e-3, 5.0, 1.0);
    const LandscapeReport rep = classify_mixed(fp);
    REQUIRE(rep.kind == FiberKind::TwoCritical);
    CHECK(derivative_sign_changes(fp) == 2);
    // ordering s_u < c_u < t_u < d_u and sign pattern
    CHECK(*rep.s_min < *rep.zero_lo);
    CHECK(*rep.zero_lo < *rep.s_max);
    CHECK(*rep.s_max < *rep.zero_hi);
    CHECK(rep.value_at_min < 0.0);
    CHECK(rep.value_at_max > 0.0);
    // branch signs of the second derivative
    CHECK(eval_fiber_second_derivative(fp, *rep.s_min) > 0.0);
    CHECK(eval_fiber_second_derivative(fp, *rep.s_max) < 0.0);
    // zeros really are zeros, relative to the size of the competing terms
    auto term_scale = [&](double s) {
        return fp.t2_coef * std::exp(2 * s) + fp.t4_coef * std::exp(4 * s) +
               fp.tp_coef * std::exp(fp.p_exp * s) + fp.tq_coef * std::exp(fp.q_exp * s);
    };
    CHECK(std::fabs(eval_fiber(fp, *rep.zero_lo)) < 1e-9 * term_scale(*rep.zero_lo));
    CHECK(std::fabs(eval_fiber(fp, *rep.zero_hi)) < 1e-9 * term_scale(*rep.zero_hi));
    // the sufficient condition held
    REQUIRE(rep.mixed_condition.has_value());
    CHECK(*rep.mixed_condition > 1.0);
}

TEST_CASE("classify_mixed: tq_coef = 0 degenerates to a unique maximum") {
    const FiberParams fp = mixed_fp(1.0, 1.0, 0.5, 0.0, 5.0, 1.0);
    const LandscapeReport rep = classify_mixed(fp);
    REQUIRE(rep.kind == FiberKind::UniqueMax);
    CHECK(rep.value_at_max > 0.0);
    CHECK(!rep.s_min.has_value());
    CHECK(derivative_sign_changes(fp) == 1);
}

TEST_CASE("classify_mixed: no false two-critical when the structure is absent") {
    // enormous low-exponent term: the fiber decreases monotonically
    const FiberParams fp = mixed_fp(1.0, 1.0, 1.0, 1e4, 5.0, 1.0);
    const LandscapeReport rep = classify_mixed(fp);
    CHECK(rep.kind != FiberKind::TwoCritical);
    CHECK(derivative_sign_changes(fp) == 0);
    REQUIRE(rep.mixed_condition.has_value());
    CHECK(*rep.mixed_condition < 1.0);
}

TEST_CASE("classify_mixed: random parameters satisfying the sufficient inequality") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> logc(-2.0, 2.0);
    std::uniform_real_distribution<double> pe(4.3, 6.0), qe(0.3, 1.8);
    int found = 0;
    while (found < 100) {
        FiberParams fp = mixed_fp(std::exp(logc(rng)), std::exp(logc(rng)), std::exp(logc(rng)),
                                  std::exp(logc(rng)), pe(rng), qe(rng));
        if (mixed_sufficiency(fp) <= 1.0) continue;
        ++found;
        const LandscapeReport rep = classify_mixed(fp);
        REQUIRE(rep.kind == FiberKind::TwoCritical);
        CHECK(derivative_sign_changes(fp) == 2);
        CHECK(*rep.s_min < *rep.zero_lo);
        CHECK(*rep.zero_lo < *rep.s_max);
        CHECK(*rep.s_max < *rep.zero_hi);
        CHECK(rep.value_at_min < 0.0);
        CHECK(rep.value_at_max > 0.0);
        CHECK(eval_fiber_second_derivative(fp, *rep.s_min) > 0.0);
        CHECK(eval_fiber_second_derivative(fp, *rep.s_max) < 0.0);
    }
}

TEST_CASE("classify_mixed never reports two-critical for single-sign-change fibers") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> logc(-2.0, 2.0);
    std::uniform_real_distribution<double> pe(4.3, 6.0), qe(0.3, 1.8);
    int checked = 0;
    while (checked < 200) {
        FiberParams fp = mixed_fp(std::exp(logc(rng)), std::exp(logc(rng)), std::exp(logc(rng)),
                                  std::exp(logc(rng)), pe(rng), qe(rng));
        const int oracle = derivative_sign_changes(fp);
        const LandscapeReport rep = classify_mixed(fp);
        if (oracle != 2) CHECK(rep.kind != FiberKind::TwoCritical);
        if (rep.kind == FiberKind::TwoCritical) CHECK(oracle == 2);
        ++checked;
    }
}

TEST_CASE("classify_supercritical: exact factorization case") {
    // Psi' = 2e^{2s}(1 + 2x - 3x^2), x = e^{2s}: root at x = 1, max value 1
    const FiberParams fp = mixed_fp(1.0, 1.0, 1.0, 0.0, 6.0, 5.0);
    const LandscapeReport rep = classify_supercritical(fp);
    REQUIRE(rep.kind == FiberKind::UniqueMax);
    CHECK(std::fabs(*rep.s_max) < 1e-10);
    CHECK(rep.value_at_max == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("classify_supercritical: uniqueness against the dense grid") {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> logc(-2.0, 2.0);
    std::uniform_real_distribution<double> pe(4.7, 6.0), qe(4.05, 4.6);
    for (int i = 0; i < 100; ++i) {
        FiberParams fp = mixed_fp(std::exp(logc(rng)), std::exp(logc(rng)), std::exp(logc(rng)),
                                  std::exp(logc(rng)), pe(rng), qe(rng));
        if (fp.q_exp >= fp.p_exp) std::swap(fp.p_exp, fp.q_exp);
        const LandscapeReport rep = classify_supercritical(fp);
        REQUIRE(rep.kind == FiberKind::UniqueMax);
        CHECK(rep.value_at_max > 0.0);
        CHECK(derivative_sign_changes(fp) == 1);
    }
    // all-ones case with monotone decrease past the maximum
    const FiberParams fp = mixed_fp(1.0, 1.0, 1.0, 1.0, 6.0, 5.0);
    const LandscapeReport rep = classify_supercritical(fp);
    REQUIRE(rep.kind == FiberKind::UniqueMax);
    double prev = eval_fiber(fp, *rep.s_max);
    for (double s = *rep.s_max + 0.05; s < *rep.s_max + 8.0; s += 0.05) {
        const double v = eval_fiber(fp, s);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("barrier: zeros, positivity window and shrinking R0") {
    const double S = 5.4779, Cp = 0.9, Cq = 1.2;
    auto model = ModelParams::make(1.0, 1.0, 1.0, 0.01, 5.0, 3.0);
    // pick mu well below mu_star_upper for these synthetic constants
    ConstantsBundle bundle = thresholds(model, S, Cp, Cq);
    const double mu0 = 0.1 * *bundle.mu_star_upper;
    auto with_mu = [&](double mu) {
        return ModelParams::make(model.a, model.b, model.c, mu, model.p, model.q);
    };

    const BarrierCurve bar = barrier(with_mu(mu0), bundle);
    CHECK(bar.R0 > 0.0);
    CHECK(bar.R1 > bar.R0);
    CHECK(std::fabs(bar(bar.R0)) < 1e-8 * bar.peak_value);
    CHECK(std::fabs(bar(bar.R1)) < 1e-8 * bar.peak_value);
    CHECK(bar.peak_value > 0.0);
    CHECK(bar(1e-6 * bar.R0) < 0.0);
    for (double f = 0.05; f < 1.0; f += 0.05)
        CHECK(bar(bar.R0 + f * (bar.R1 - bar.R0)) > 0.0);

    double prev_R0 = bar.R0;
    for (int k = 1; k <= 6; ++k) {
        const BarrierCurve b2 = barrier(with_mu(mu0 * std::pow(2.0, -k)), bundle);
        CHECK(b2.R0 < prev_R0);
        prev_R0 = b2.R0;
    }

    // structure not guaranteed at mu >= mu_star_upper
    CHECK_THROWS_AS(barrier(with_mu(*bundle.mu_star_upper * 1.5), bundle), std::invalid_argument);
}
