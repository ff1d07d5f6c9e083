#pragma once

// Shared fixtures and hand-rolled generators for the test binaries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lsctl/equilibrium.hpp"
#include "lsctl/random.hpp"

namespace lsctl::test {

inline const double kLn2 = std::numbers::ln2;

/// The constant case k = 2, mu = 0 on [0, ln 2], whose root is zeta = 1.
inline AgeGrid ln2_grid(std::size_t n = 2001) { return AgeGrid(kLn2, n); }

inline FamilySample family_draw(std::uint64_t seed, std::uint64_t index, const AgeGrid& grid) {
  Rng rng = Rng::stream(seed, index);
  return sample_family(FamilyParams::sample(rng), grid);
}

inline SpeciesSpec species_draw(std::uint64_t seed, std::uint64_t index, const AgeGrid& grid) {
  const FamilySample s = family_draw(seed, index, grid);
  return build_species(s.k, s.mu, s.g);
}

/// Smooth positive profile lo + (hi - lo) * (mix of two random cosines mapped into [0, 1]).
inline AgeProfile smooth_profile(Rng& rng, const AgeGrid& grid, double lo, double hi) {
  const double w1 = rng.uniform(0.5, 4.0), w2 = rng.uniform(0.5, 4.0);
  const double p1 = rng.uniform(0.0, 6.3), p2 = rng.uniform(0.0, 6.3);
  const double m = rng.uniform();
  return AgeProfile::from_function(grid, [&](double a) {
    const double s = m * std::cos(w1 * a + p1) + (1.0 - m) * std::cos(w2 * a + p2);
    return lo + (hi - lo) * 0.5 * (1.0 + s);
  });
}

struct Reference {
  AgeGrid grid{1.0, 201};
  SpeciesSpec prey, predator;
  EquilibriumSpec eq;
};

/// Prey from stream (1, 2), predator from (1, 8), dilution setpoint 0.83.
inline const Reference& reference() {
  static const Reference f = [] {
    Reference x;
    x.prey = species_draw(1, 2, x.grid);
    x.predator = species_draw(1, 8, x.grid);
    x.eq = build_equilibrium_for_dilution(x.prey, x.predator, 0.83);
    return x;
  }();
  return f;
}

/// Maximum relative difference between two equal-length series.
inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1e-300, std::abs(b[i])));
  }
  return m;
}

}  // namespace lsctl::test
