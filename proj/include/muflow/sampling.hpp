#pragma once

// Seeded generators for randomized checks: band-limited fields, smooth
// positive densities, and random circle diffeomorphisms.

#include <cmath>

#include "muflow/densities.hpp"
#include "muflow/rng.hpp"

namespace muflow {

/// Random band-limited field: modes 1..k_max with coefficients in
/// [-amp, amp], plus an optional mean.
inline PeriodicField random_band_limited(const PeriodicGrid& g, Rng& rng, int k_max,
                                         double amp = 1.0, double mean_value = 0.0) {
    PeriodicField f = constant_field(g, mean_value);
    for (int k = 1; k <= k_max; ++k) {
        double a = rng.uniform(-amp, amp);
        double b = rng.uniform(-amp, amp);
        for (int j = 0; j < g.n; ++j) {
            double w = 2.0 * std::numbers::pi * k * g.point(j);
            f[j] += a * std::cos(w) + b * std::sin(w);
        }
    }
    return f;
}

/// Smooth strictly positive density; offset keeps it away from zero.
inline PeriodicField random_positive_density(const PeriodicGrid& g, Rng& rng, int k_max = 3,
                                             double offset = 2.0, double amp = 0.4) {
    return random_band_limited(g, rng, k_max, amp, offset);
}

/// Random smooth orientation-preserving circle map. Displacements are scaled
/// until min dxi exceeds the margin.
inline CircleMap random_diffeo(const PeriodicGrid& g, Rng& rng, int k_max = 4,
                               double strength = 0.3, double margin = 0.2) {
    PeriodicField d(g);
    for (int k = 1; k <= k_max; ++k) {
        double a = rng.uniform(-strength, strength) / k;
        double b = rng.uniform(-strength, strength) / k;
        for (int j = 0; j < g.n; ++j) {
            double w = 2.0 * std::numbers::pi * k * g.point(j);
            d[j] += a * std::sin(w) + b * (std::cos(w) - 1.0);
        }
    }
    CircleMap xi = CircleMap::from_displacement(d);
    for (int guard = 0; guard < 60 && min_value(xi.dxi()) <= margin; ++guard)
        xi.disp = 0.5 * xi.disp;
    return xi;
}

} // namespace muflow
