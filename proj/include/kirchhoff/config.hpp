#pragma once

// Batch-run configuration: one command plus key=value settings, read from
// long-form flags (--key value) and/or a config file of key=value lines with
// '#' comments. Flags override the file. Unknown keys are rejected and a
// parsed config round-trips through serialize().

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"

namespace kirchhoff {

enum class Command {
    Constants,
    Landscape,
    Groundstate,
    SolveLocal,
    SolveMp,
    Sweep,
    InstantonCheck,
};

inline const char* command_name(Command c) {
    switch (c) {
        case Command::Constants: return "constants";
        case Command::Landscape: return "landscape";
        case Command::Groundstate: return "groundstate";
        case Command::SolveLocal: return "solve-local";
        case Command::SolveMp: return "solve-mp";
        case Command::Sweep: return "sweep";
        case Command::InstantonCheck: return "instanton-check";
    }
    return "?";
}

inline Command command_from_name(const std::string& s) {
    for (Command c : {Command::Constants, Command::Landscape, Command::Groundstate,
                      Command::SolveLocal, Command::SolveMp, Command::Sweep,
                      Command::InstantonCheck})
        if (s == command_name(c)) return c;
    throw std::invalid_argument("unknown command: " + s);
}

struct RunConfig {
    Command command = Command::Constants;

    // model
    double a = 1.0, b = 1.0, c = 1.0;
    std::string mu = "0";  // a number, or "auto" = 0.1 min{mu_*, mu*}
    double p = 5.0, q = 3.0;
    std::string regime;  // optional cross-check against the inferred regime

    // grid
    std::size_t grid_n = 4096;
    double grid_rmin = 1e-5, grid_rmax = 1e3;

    // solver tolerances
    double grad_tol = 1e-7;
    double pohozaev_tol = 1e-6;
    int max_iterations = 100000;

    // shooting overrides
    double ode_step = 0.02;
    double decay_threshold = 1e-6;
    int max_bisections = 200;

    // command specifics
    std::string branch = "mp";          // sweep: "mp" or "local"
    std::string mu_geom;                // sweep: "start,ratio,count"
    std::string mu_list;                // sweep: comma-separated values
    std::string eps = "1";              // instanton-check: "lo:hi:count" or a number
    bool limit = false;                 // groundstate: solve the mu = 0 ground state
    std::string field_in;               // landscape: classify this field's fiber
    std::string field_out;              // dump the solution field here
    std::string out;                    // JSON output path ("" = stdout)
    std::string csv;                    // CSV output path for sweep/instanton-check

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline double parse_number(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("malformed number for " + key + ": '" + v + "'");
    return x;
}

inline long parse_integer(const std::string& key, const std::string& v) {
    const double x = parse_number(key, v);
    const long n = static_cast<long>(x);
    if (static_cast<double>(n) != x)
        throw std::invalid_argument(key + " must be an integer, got '" + v + "'");
    return n;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(key + " must be true/false, got '" + v + "'");
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& val) {
    if (key == "command") cfg.command = command_from_name(val);
    else if (key == "a") cfg.a = parse_number(key, val);
    else if (key == "b") cfg.b = parse_number(key, val);
    else if (key == "c") cfg.c = parse_number(key, val);
    else if (key == "mu") cfg.mu = val;
    else if (key == "p") cfg.p = parse_number(key, val);
    else if (key == "q") cfg.q = parse_number(key, val);
    else if (key == "regime") cfg.regime = val;
    else if (key == "grid-n") cfg.grid_n = static_cast<std::size_t>(parse_integer(key, val));
    else if (key == "grid-rmin") cfg.grid_rmin = parse_number(key, val);
    else if (key == "grid-rmax") cfg.grid_rmax = parse_number(key, val);
    else if (key == "grad-tol") cfg.grad_tol = parse_number(key, val);
    else if (key == "pohozaev-tol") cfg.pohozaev_tol = parse_number(key, val);
    else if (key == "max-iterations") cfg.max_iterations = static_cast<int>(parse_integer(key, val));
    else if (key == "ode-step") cfg.ode_step = parse_number(key, val);
    else if (key == "decay-threshold") cfg.decay_threshold = parse_number(key, val);
    else if (key == "max-bisections") cfg.max_bisections = static_cast<int>(parse_integer(key, val));
    else if (key == "branch") cfg.branch = val;
    else if (key == "mu-geom") cfg.mu_geom = val;
    else if (key == "mu-list") cfg.mu_list = val;
    else if (key == "eps") cfg.eps = val;
    else if (key == "limit") cfg.limit = parse_bool(key, val);
    else if (key == "field-in") cfg.field_in = val;
    else if (key == "field-out") cfg.field_out = val;
    else if (key == "out") cfg.out = val;
    else if (key == "csv") cfg.csv = val;
    else throw std::invalid_argument("unknown key: " + key);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// mu as written, before auto-resolution; throws on malformed numbers.
inline bool mu_is_auto(const RunConfig& cfg) { return cfg.mu == "auto"; }

inline double mu_literal(const RunConfig& cfg) {
    if (mu_is_auto(cfg)) throw std::invalid_argument("mu is 'auto' and has not been resolved");
    return detail::parse_number("mu", cfg.mu);
}

// Model with an explicit mu value (after auto-resolution); validates the
// exponent ranges and checks any explicit regime key against the inferred one.
inline ModelParams model_from_config(const RunConfig& cfg, double mu_value) {
    const ModelParams m = ModelParams::make(cfg.a, cfg.b, cfg.c, mu_value, cfg.p, cfg.q);
    if (!cfg.regime.empty() && cfg.regime != regime_name(m.regime))
        throw std::invalid_argument("declared regime '" + cfg.regime +
                                    "' contradicts the inferred regime '" +
                                    regime_name(m.regime) + "'");
    return m;
}

// Parses "command --key value ..." or "--config file ..." argument lists.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    bool have_command = false;
    std::vector<std::pair<std::string, std::string>> flags;
    std::string config_path;

    std::size_t i = 0;
    if (!args.empty() && args[0].rfind("--", 0) != 0) {
        cfg.command = command_from_name(args[0]);
        have_command = true;
        i = 1;
    }
    for (; i < args.size(); i += 2) {
        if (args[i].rfind("--", 0) != 0)
            throw std::invalid_argument("expected --key, got: " + args[i]);
        if (i + 1 >= args.size())
            throw std::invalid_argument("missing value for " + args[i]);
        const std::string key = args[i].substr(2);
        if (key == "config") config_path = args[i + 1];
        else flags.emplace_back(key, args[i + 1]);
    }

    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(config_path + ":" + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string val = detail::trim(line.substr(eq + 1));
            if (key == "command" && have_command) continue;  // command line wins
            detail::apply_key(cfg, key, val);
        }
    }
    for (const auto& [key, val] : flags) detail::apply_key(cfg, key, val);

    if (mu_is_auto(cfg)) {
        if (!(cfg.q < kLowerStructural && cfg.p > kMassCritical))
            throw std::invalid_argument("mu = auto requires the mixed regime thresholds");
    } else {
        (void)mu_literal(cfg);
    }
    return cfg;
}

// Full key=value form; parse_config({"--config", <file with this text>})
// reproduces the config exactly.
inline std::string serialize(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[40];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    out << "command = " << command_name(cfg.command) << "\n";
    out << "a = " << num(cfg.a) << "\n";
    out << "b = " << num(cfg.b) << "\n";
    out << "c = " << num(cfg.c) << "\n";
    out << "mu = " << cfg.mu << "\n";
    out << "p = " << num(cfg.p) << "\n";
    out << "q = " << num(cfg.q) << "\n";
    if (!cfg.regime.empty()) out << "regime = " << cfg.regime << "\n";
    out << "grid-n = " << cfg.grid_n << "\n";
    out << "grid-rmin = " << num(cfg.grid_rmin) << "\n";
    out << "grid-rmax = " << num(cfg.grid_rmax) << "\n";
    out << "grad-tol = " << num(cfg.grad_tol) << "\n";
    out << "pohozaev-tol = " << num(cfg.pohozaev_tol) << "\n";
    out << "max-iterations = " << cfg.max_iterations << "\n";
    out << "ode-step = " << num(cfg.ode_step) << "\n";
    out << "decay-threshold = " << num(cfg.decay_threshold) << "\n";
    out << "max-bisections = " << cfg.max_bisections << "\n";
    out << "branch = " << cfg.branch << "\n";
    if (!cfg.mu_geom.empty()) out << "mu-geom = " << cfg.mu_geom << "\n";
    if (!cfg.mu_list.empty()) out << "mu-list = " << cfg.mu_list << "\n";
    out << "eps = " << cfg.eps << "\n";
    out << "limit = " << (cfg.limit ? "true" : "false") << "\n";
    if (!cfg.field_in.empty()) out << "field-in = " << cfg.field_in << "\n";
    if (!cfg.field_out.empty()) out << "field-out = " << cfg.field_out << "\n";
    if (!cfg.out.empty()) out << "out = " << cfg.out << "\n";
    if (!cfg.csv.empty()) out << "csv = " << cfg.csv << "\n";
    return out.str();
}

}  // namespace kirchhoff
