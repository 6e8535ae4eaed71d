#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nonortho/complex_matrix.hpp"
#include "nonortho/quasibound1d.hpp"

// Frozen defaults shared by the CLI, the tests and the acceptance suite.
// Bump kDefaultsVersion whenever a value here changes.

namespace nonortho::defaults {

inline constexpr int kDefaultsVersion = 1;

inline constexpr std::uint64_t kSeed = 20200101;

// ensemble
inline constexpr std::size_t kEnsembleDim = 20;
inline constexpr std::size_t kEnsembleRealizations = 50;
inline constexpr double kDecayLow = 0.0;
inline constexpr double kDecayHigh = 2.0;

// bound checks
inline constexpr double kLwTol = 1e-8;
inline constexpr double kBiorthTol = 1e-8;
inline constexpr double kDistanceTol = 1e-8;
inline constexpr double kIdentityTol = 1e-7;
inline constexpr double kResidualTol = 1e-9;

// PT dimer sweep
inline constexpr double kPtGamma = 1.0;
inline constexpr double kPtGMin = 0.4;
inline constexpr double kPtGMax = 0.6;
inline constexpr std::size_t kPtSteps = 201;

/// Two 0.2-wide barriers of height 50 enclosing a 2.0-wide well, open on both sides.
inline PiecewisePotential double_barrier() {
    return {WaveMode::Schrodinger, {0.0, 0.2, 2.2, 2.4}, {50.0, 0.0, 50.0}, LeftBoundary::Open};
}

/// Half-line double barrier: wall at 0, free gap, then the same two barriers.
inline PiecewisePotential walled_double_barrier() {
    return {WaveMode::Schrodinger, {0.0, 0.5, 0.7, 2.7, 2.9}, {0.0, 50.0, 0.0, 50.0}, LeftBoundary::Wall};
}

/// Dielectric slab eps = 4 on [0, 1] in vacuum.
inline PiecewisePotential slab() { return {WaveMode::Helmholtz, {0.0, 1.0}, {4.0}, LeftBoundary::Open}; }

/// Same slab backed by a perfect mirror at x = 0.
inline PiecewisePotential walled_slab() { return {WaveMode::Helmholtz, {0.0, 1.0}, {4.0}, LeftBoundary::Wall}; }

inline SearchBox search_box() { return {}; }

/// |alpha| geometric from 1e-2 to 1e2 (41 values) times 24 phases.
inline std::vector<Complex> backflow_alphas() {
    std::vector<Complex> out;
    for (int m = 0; m <= 40; ++m) {
        const double mag = std::pow(10.0, -2.0 + 0.1 * m);
        for (int ph = 0; ph < 24; ++ph) out.push_back(std::polar(mag, 2.0 * 3.14159265358979323846 * ph / 24.0));
    }
    return out;
}

/// 21 points on each side of the support, from its edge out to 4 length units.
inline std::vector<double> backflow_xs(const PiecewisePotential& p) {
    std::vector<double> out;
    for (int i = 0; i <= 20; ++i) {
        const double d = 0.2 * i;
        if (p.left == LeftBoundary::Open) out.push_back(p.support_begin() - d);
        out.push_back(p.support_end() + d);
    }
    return out;
}

}  // namespace nonortho::defaults
