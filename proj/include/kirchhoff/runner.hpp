#pragma once

// Command execution behind the CLI: every computation in the toolkit as a
// reproducible batch run with JSON reports, CSV tables and plain-text field
// dumps. Identical configs produce bit-identical outputs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchhoff/config.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/solver.hpp"

namespace kirchhoff {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? fmt17(*v) : std::string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

}  // namespace detail

struct RunContext {
    RunConfig cfg;
    double mu_value = 0.0;
    ModelParams model;
    ConstantsBundle constants;
    std::shared_ptr<const RadialGrid> grid;
    ShootingConfig shooting;
    SolveOptions solve_opts;
};

inline ordered_json config_json(const RunConfig& cfg, double mu_value) {
    ordered_json j;
    j["command"] = command_name(cfg.command);
    j["a"] = cfg.a;
    j["b"] = cfg.b;
    j["c"] = cfg.c;
    j["mu"] = cfg.mu;
    j["mu-resolved"] = mu_value;
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    if (!cfg.regime.empty()) j["regime"] = cfg.regime;
    j["grid-n"] = cfg.grid_n;
    j["grid-rmin"] = cfg.grid_rmin;
    j["grid-rmax"] = cfg.grid_rmax;
    j["grad-tol"] = cfg.grad_tol;
    j["pohozaev-tol"] = cfg.pohozaev_tol;
    j["max-iterations"] = cfg.max_iterations;
    j["ode-step"] = cfg.ode_step;
    j["decay-threshold"] = cfg.decay_threshold;
    j["max-bisections"] = cfg.max_bisections;
    j["branch"] = cfg.branch;
    if (!cfg.mu_geom.empty()) j["mu-geom"] = cfg.mu_geom;
    if (!cfg.mu_list.empty()) j["mu-list"] = cfg.mu_list;
    j["eps"] = cfg.eps;
    j["limit"] = cfg.limit;
    if (!cfg.field_in.empty()) j["field-in"] = cfg.field_in;
    if (!cfg.field_out.empty()) j["field-out"] = cfg.field_out;
    return j;
}

inline ordered_json constants_json(const ConstantsBundle& b, const ModelParams& model) {
    ordered_json j;
    j["sobolev_S"] = b.sobolev_S;
    ordered_json gn;
    for (const auto& [pexp, cval] : b.gn_C) gn[detail::fmt17(pexp)] = cval;
    j["gn_C"] = gn;
    j["delta_p"] = model.delta_p();
    j["delta_q"] = model.delta_q();
    j["lambda_big"] = b.lambda_big;
    j["critical_energy"] = b.critical_energy;
    if (b.mu_star_upper) j["mu_star_upper"] = *b.mu_star_upper;
    if (b.mu_star_lower) j["mu_star_lower"] = *b.mu_star_lower;
    if (b.mu_double_star) j["mu_double_star"] = *b.mu_double_star;
    if (b.c_pq) j["c_pq"] = *b.c_pq;
    return j;
}

inline ordered_json solve_json(const ModelParams& model, const SolveResult& r) {
    ordered_json j;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["branch"] = branch_name(r.branch);
    j["iterations"] = r.iterations;
    j["energy"] = r.energy;
    j["lambda"] = r.lambda;
    j["pohozaev_residual"] = r.pohozaev_residual;
    j["grad_residual"] = r.grad_residual;
    j["mass_norm"] = r.field.mass_norm();
    j["grad_norm"] = r.field.grad_norm();
    j["dilation_log"] = r.field.dilation_log();
    if (model.sobolev_critical()) j["l6_norm6"] = r.field.lp_pow(6.0);
    j["lambda_least_squares"] = least_squares_multiplier(model, r.field);
    j["pde_residual"] = pde_residual(model, r.field, r.lambda);
    return j;
}

namespace detail {

inline std::vector<double> sweep_mu_values(const RunConfig& cfg) {
    std::vector<double> mus;
    if (!cfg.mu_list.empty()) {
        std::istringstream in(cfg.mu_list);
        std::string tok;
        while (std::getline(in, tok, ',')) mus.push_back(parse_number("mu-list", trim(tok)));
    } else if (!cfg.mu_geom.empty()) {
        std::istringstream in(cfg.mu_geom);
        std::string s_start, s_ratio, s_count;
        if (!std::getline(in, s_start, ',') || !std::getline(in, s_ratio, ',') ||
            !std::getline(in, s_count))
            throw std::invalid_argument("mu-geom must be start,ratio,count");
        const double start = parse_number("mu-geom", trim(s_start));
        const double ratio = parse_number("mu-geom", trim(s_ratio));
        const long count = parse_integer("mu-geom", trim(s_count));
        if (!(ratio > 0.0 && ratio < 1.0) || count < 1)
            throw std::invalid_argument("mu-geom needs ratio in (0,1) and count >= 1");
        double v = start;
        for (long k = 0; k < count; ++k, v *= ratio) mus.push_back(v);
    } else {
        throw std::invalid_argument("sweep requires mu-geom or mu-list");
    }
    return mus;
}

inline std::vector<double> eps_values(const std::string& spec) {
    const auto c1 = spec.find(':');
    if (c1 == std::string::npos) return {parse_number("eps", spec)};
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("eps range must be lo:hi:count");
    const double lo = parse_number("eps", spec.substr(0, c1));
    const double hi = parse_number("eps", spec.substr(c1 + 1, c2 - c1 - 1));
    const long count = parse_integer("eps", spec.substr(c2 + 1));
    if (!(lo > 0.0 && hi > lo) || count < 2)
        throw std::invalid_argument("eps range needs 0 < lo < hi and count >= 2");
    std::vector<double> out(count);
    for (long k = 0; k < count; ++k)
        out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
    return out;
}

}  // namespace detail

inline ShootingConfig shooting_from_config(const RunConfig& cfg) {
    ShootingConfig sh;
    sh.ode_step = cfg.ode_step;
    sh.decay_threshold = cfg.decay_threshold;
    sh.max_bisections = cfg.max_bisections;
    return sh;
}

inline std::shared_ptr<const RadialGrid> grid_from_config(const RunConfig& cfg) {
    return (cfg.grid_n == 4096 && cfg.grid_rmin == 1e-5 && cfg.grid_rmax == 1e3)
               ? RadialGrid::standard()
               : RadialGrid::log_uniform(cfg.grid_rmin, cfg.grid_rmax, cfg.grid_n);
}

// Builds the shared pieces of a run: resolved mu, model, constants, grid.
inline RunContext make_context(const RunConfig& cfg) {
    RunContext ctx{cfg,
                   0.0,
                   ModelParams::make(1, 1, 1, 0, 5, 3),
                   ConstantsBundle{},
                   nullptr,
                   ShootingConfig{},
                   SolveOptions{}};
    ctx.shooting = shooting_from_config(cfg);
    ctx.solve_opts.grad_tol = cfg.grad_tol;
    ctx.solve_opts.pohozaev_tol = cfg.pohozaev_tol;
    ctx.solve_opts.max_iterations = cfg.max_iterations;
    ctx.grid = grid_from_config(cfg);

    const bool limit_run = cfg.command == Command::Groundstate && cfg.limit;
    if (mu_is_auto(cfg)) {
        // thresholds do not depend on mu: resolve against a mixed-regime probe
        const ModelParams probe = model_from_config(cfg, 1e-12);
        ctx.constants = build_constants(probe, ctx.shooting);
        ctx.mu_value = 0.1 * ctx.constants.mixed_mu_limit();
        ctx.model = model_from_config(cfg, ctx.mu_value);
    } else {
        ctx.mu_value = limit_run ? 0.0 : mu_literal(cfg);
        ctx.model = model_from_config(cfg, ctx.mu_value);
        ctx.constants = build_constants(ctx.model, ctx.shooting);
    }
    return ctx;
}

// Executes one command. The returned JSON embeds the resolved config and the
// constants bundle; CSV tables and field dumps are written as side artifacts.
inline ordered_json run_command(const RunConfig& cfg) {
    ordered_json doc;
    switch (cfg.command) {
        case Command::Constants: {
            const RunContext ctx = make_context(cfg);
            doc["command"] = command_name(cfg.command);
            doc["config"] = config_json(cfg, ctx.mu_value);
            doc["constants"] = constants_json(ctx.constants, ctx.model);
            ordered_json res;
            res["regime"] = regime_name(ctx.model.regime);
            res["p_delta_p"] = ctx.model.p * ctx.model.delta_p();
            res["q_delta_q"] = ctx.model.q * ctx.model.delta_q();
            if (ctx.constants.mu_star_upper)
                res["mixed_mu_limit"] = ctx.constants.mixed_mu_limit();
            doc["result"] = res;
            break;
        }
        case Command::Landscape: {
            const RunContext ctx = make_context(cfg);
            doc["command"] = command_name(cfg.command);
            doc["config"] = config_json(cfg, ctx.mu_value);
            doc["constants"] = constants_json(ctx.constants, ctx.model);
            ordered_json res;
            const BarrierCurve bar = barrier(ctx.model, ctx.constants);
            res["R0"] = bar.R0;
            res["R1"] = bar.R1;
            res["peak_radius"] = bar.peak_radius;
            res["peak_value"] = bar.peak_value;
            if (!cfg.field_in.empty()) {
                const RadialField u = load_field(cfg.field_in);
                const LandscapeReport rep = classify_fiber(fiber_of(ctx.model, u));
                ordered_json fj;
                fj["kind"] = fiber_kind_name(rep.kind);
                if (rep.s_min) fj["s_min"] = *rep.s_min;
                if (rep.s_max) fj["s_max"] = *rep.s_max;
                if (rep.zero_lo) fj["zero_lo"] = *rep.zero_lo;
                if (rep.zero_hi) fj["zero_hi"] = *rep.zero_hi;
                if (rep.kind == FiberKind::TwoCritical) fj["value_at_min"] = rep.value_at_min;
                if (rep.kind != FiberKind::Unclassified) fj["value_at_max"] = rep.value_at_max;
                if (rep.mixed_condition) fj["mixed_condition"] = *rep.mixed_condition;
                res["fiber"] = fj;
            }
            doc["result"] = res;
            break;
        }
        case Command::Groundstate: {
            ordered_json res;
            if (cfg.limit) {
                const RunContext ctx = make_context(cfg);
                doc["command"] = command_name(cfg.command);
                doc["config"] = config_json(cfg, ctx.mu_value);
                doc["constants"] = constants_json(ctx.constants, ctx.model);
                const SolveResult r =
                    solve_limit_ground_state(ctx.model, ctx.shooting, ctx.grid);
                res = solve_json(ctx.model, r);
                if (!cfg.field_out.empty()) dump_field(r.field, cfg.field_out);
            } else {
                // the GN extremal exists for any p in (2,6): no model-regime
                // validation here, only the exponent itself
                const ShootingConfig sh = shooting_from_config(cfg);
                const WpSolution wp = solve_wp(cfg.p, sh);
                const RadialField wf = wp.sample(grid_from_config(cfg));
                const double mu_echo = mu_is_auto(cfg) ? 0.0 : mu_literal(cfg);
                doc["command"] = command_name(cfg.command);
                doc["config"] = config_json(cfg, mu_echo);
                const double S = sobolev_constant();
                ordered_json cj;
                cj["sobolev_S"] = S;
                cj["lambda_big"] = lambda_big(cfg.a, cfg.b, S);
                cj["critical_energy"] = critical_energy_level(cfg.a, cfg.b, S);
                doc["constants"] = cj;
                res["p"] = cfg.p;
                res["delta_p"] = delta_exponent(cfg.p);
                res["amplitude"] = wp.amplitude;
                res["mass_norm"] = wf.mass_norm();
                res["grad_norm"] = wf.grad_norm();
                res["lp_norm"] = wf.lp_norm(cfg.p);
                res["gn_constant"] =
                    std::pow(cfg.p / (2.0 * std::pow(wf.mass_norm(), cfg.p - 2.0)), 1.0 / cfg.p);
                if (!cfg.field_out.empty()) dump_field(wf, cfg.field_out);
            }
            doc["result"] = res;
            break;
        }
        case Command::SolveLocal:
        case Command::SolveMp: {
            const RunContext ctx = make_context(cfg);
            doc["command"] = command_name(cfg.command);
            doc["config"] = config_json(cfg, ctx.mu_value);
            doc["constants"] = constants_json(ctx.constants, ctx.model);
            const SolveResult r =
                cfg.command == Command::SolveLocal
                    ? local_minimize(ctx.model, ctx.constants,
                                     gaussian_init(ctx.model.c, 1.0, ctx.grid), ctx.solve_opts)
                    : mountain_pass_multistart(ctx.model, ctx.constants, ctx.solve_opts,
                                               ctx.grid);
            doc["result"] = solve_json(ctx.model, r);
            if (!cfg.field_out.empty()) dump_field(r.field, cfg.field_out);
            break;
        }
        case Command::Sweep: {
            const RunContext ctx = make_context(cfg);
            doc["command"] = command_name(cfg.command);
            doc["config"] = config_json(cfg, ctx.mu_value);
            doc["constants"] = constants_json(ctx.constants, ctx.model);
            const std::vector<double> mus = detail::sweep_mu_values(cfg);
            Branch branch;
            if (cfg.branch == "local") branch = Branch::PPlus;
            else if (cfg.branch == "mp") branch = Branch::PMinus;
            else throw std::invalid_argument("branch must be 'local' or 'mp'");
            const auto rows =
                mu_sweep(ctx.model, mus, branch, ctx.constants, ctx.solve_opts, ctx.grid);

            std::string csv = "mu,m_local,sigma_mp,grad_norm_local,l6_norm6,lambda_local,"
                              "lambda_mp,error\r\n";
            int converged_rows = 0;
            for (const auto& row : rows) {
                csv += detail::fmt17(row.mu) + "," + detail::csv_opt(row.m_local) + "," +
                       detail::csv_opt(row.sigma_mp) + "," +
                       detail::csv_opt(row.grad_norm_local) + "," +
                       detail::csv_opt(row.l6_norm6) + "," +
                       detail::csv_opt(row.lambda_local) + "," +
                       detail::csv_opt(row.lambda_mp) + "," + detail::csv_field(row.error) +
                       "\r\n";
                if (row.error.empty()) ++converged_rows;
            }
            const std::string csv_path = cfg.csv.empty() ? "sweep.csv" : cfg.csv;
            detail::write_text(csv_path, csv);
            ordered_json res;
            res["rows"] = rows.size();
            res["converged_rows"] = converged_rows;
            res["csv"] = csv_path;
            doc["result"] = res;
            break;
        }
        case Command::InstantonCheck: {
            const RunContext ctx = make_context(cfg);
            doc["command"] = command_name(cfg.command);
            doc["config"] = config_json(cfg, ctx.mu_value);
            doc["constants"] = constants_json(ctx.constants, ctx.model);
            const std::vector<double> eps = detail::eps_values(cfg.eps);
            const double S32 = std::pow(ctx.constants.sobolev_S, 1.5);
            std::string csv = "eps,mass2,grad2,lq_q,l6_6\r\n";
            std::vector<double> le, lmass, lq, l6gap, lgradgap;
            for (double e : eps) {
                const InstantonSuite suite = instanton(e, ctx.model.c, ctx.grid);
                const double mass2 = suite.u_cut.mass_sq();
                const double grad2 = suite.u_cut.grad_sq();
                const double lqq = suite.u_cut.lp_pow(ctx.model.q);
                const double l66 = suite.u_cut.lp_pow(6.0);
                csv += detail::fmt17(e) + "," + detail::fmt17(mass2) + "," +
                       detail::fmt17(grad2) + "," + detail::fmt17(lqq) + "," +
                       detail::fmt17(l66) + "\r\n";
                le.push_back(std::log(e));
                lmass.push_back(std::log(mass2));
                lq.push_back(std::log(lqq));
                l6gap.push_back(std::log(std::fabs(S32 - l66)));
                lgradgap.push_back(std::log(std::fabs(grad2 - S32)));
            }
            const std::string csv_path = cfg.csv.empty() ? "instanton-check.csv" : cfg.csv;
            detail::write_text(csv_path, csv);
            ordered_json res;
            res["csv"] = csv_path;
            res["rows"] = eps.size();
            if (eps.size() >= 2) {
                res["slope_mass2"] = fit_slope(le, lmass);
                res["slope_lq_q"] = fit_slope(le, lq);
                res["slope_l6_gap"] = fit_slope(le, l6gap);
                res["slope_grad_gap"] = fit_slope(le, lgradgap);
            }
            doc["result"] = res;
            break;
        }
    }
    return doc;
}

// Full front end: parse arguments, execute, write the JSON report to the
// configured path or stdout. Errors become structured JSON on stderr with a
// nonzero exit code; an unconverged solve exits with 2.
inline int run_main(const std::vector<std::string>& args, std::ostream& out_stream = std::cout,
                    std::ostream& err_stream = std::cerr) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = e.what();
        err["stage"] = "parse";
        err_stream << err.dump(2) << "\n";
        return 1;
    }
    try {
        const ordered_json doc = run_command(cfg);
        const std::string text = doc.dump(2) + "\n";
        if (cfg.out.empty()) out_stream << text;
        else detail::write_text(cfg.out, text);
        if ((cfg.command == Command::SolveLocal || cfg.command == Command::SolveMp) &&
            !doc["result"]["converged"].get<bool>()) {
            ordered_json err;
            err["error"] = "solve did not converge";
            err["status"] = doc["result"]["status"];
            err_stream << err.dump(2) << "\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = e.what();
        err["stage"] = "run";
        err["command"] = command_name(cfg.command);
        err_stream << err.dump(2) << "\n";
        return 1;
    }
}

}  // namespace kirchhoff
