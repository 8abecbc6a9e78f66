// Command-line front end for the normalized-solution toolkit.
//
//   kirchhoff <command> [--key value ...] [--config file]
//
// Commands: constants, landscape, groundstate, solve-local, solve-mp, sweep,
// instanton-check. See README.md for the key reference.

#include <iostream>
#include <string>
#include <vector>

#include "kirchhoff/runner.hpp"

namespace {

const char* kUsage =
    "usage: kirchhoff <command> [--key value ...] [--config file]\n"
    "\n"
    "commands:\n"
    "  constants        evaluate delta exponents, S, C_p, Lambda and the mu thresholds\n"
    "  landscape        barrier curve h with R0, R1; classify a field's fiber (--field-in)\n"
    "  groundstate      shoot the GN extremal W_p; --limit true solves the mu = 0 state\n"
    "  solve-local      local minimizer on the mass sphere (mixed regime)\n"
    "  solve-mp         mountain-pass point via the reduced min-max\n"
    "  sweep            mu sweep (--branch local|mp, --mu-geom start,ratio,count)\n"
    "  instanton-check  cutoff instanton norms vs eps (--eps lo:hi:count) with slopes\n"
    "\n"
    "model keys: --a --b --c --mu (number or 'auto') --p --q [--regime name]\n"
    "outputs:    --out report.json --csv table.csv --field-out field.txt\n";

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        std::cout << kUsage;
        return args.empty() ? 1 : 0;
    }
    return kirchhoff::run_main(args);
}
