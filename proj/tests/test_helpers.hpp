#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "kirchhoff/field.hpp"

namespace testutil {

// Random smooth decaying radial field: a few Gaussian bumps of mixed sign.
inline kirchhoff::RadialField random_smooth_field(std::mt19937& rng,
                                                  std::shared_ptr<const kirchhoff::RadialGrid> grid =
                                                      kirchhoff::RadialGrid::standard()) {
    std::uniform_int_distribution<int> nbump(1, 3);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> width(0.3, 4.0);
    std::uniform_real_distribution<double> center(0.0, 3.0);
    struct Bump {
        double a, w, c;
    };
    std::vector<Bump> bumps;
    const int k = nbump(rng);
    for (int i = 0; i < k; ++i) bumps.push_back({amp(rng), width(rng), center(rng)});
    // keep the field nonzero
    if (std::fabs(bumps[0].a) < 0.1) bumps[0].a = 0.5;
    return kirchhoff::make_field(std::move(grid), [bumps](double r) {
        double v = 0.0;
        for (const auto& b : bumps) {
            const double z = (r - b.c) / b.w;
            v += b.a * std::exp(-z * z);
        }
        return v;
    });
}

// Positive radially decreasing random field (Gaussian of random width).
inline kirchhoff::RadialField random_decreasing_field(std::mt19937& rng, double mass,
                                                      std::shared_ptr<const kirchhoff::RadialGrid>
                                                          grid = kirchhoff::RadialGrid::standard()) {
    std::uniform_real_distribution<double> width(0.3, 3.0);
    const double w = width(rng);
    auto u = kirchhoff::make_field(std::move(grid),
                                   [w](double r) { return std::exp(-(r / w) * (r / w)); });
    return kirchhoff::normalize_mass(u, mass);
}

inline double rel_diff(double x, double y) {
    return std::fabs(x - y) / std::max({std::fabs(x), std::fabs(y), 1e-300});
}

}  // namespace testutil
