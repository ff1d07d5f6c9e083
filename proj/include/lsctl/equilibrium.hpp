#pragma once

#include "lsctl/operators.hpp"
#include "lsctl/profiles.hpp"

namespace lsctl {

/// One species: (k, mu, g) and everything the controller derives from them at the exact root.
struct SpeciesSpec {
  AgeProfile k, mu, g;
  LSRoot root;
  double zeta = 0.0;
  double kappa = 0.0;
  AgeProfile n_profile;  ///< exp(-zeta a - int mu)
  AgeProfile pi0;
  double pi0_n = 0.0;  ///< <pi0, n>; equals kappa up to quadrature error

  const AgeGrid& grid() const { return k.grid(); }
};

SpeciesSpec build_species(const AgeProfile& k, const AgeProfile& mu, const AgeProfile& g,
                          double tol = kDefaultLsTolerance);

/// Setpoint scalars of the equilibrium; species 1 is the prey, 2 the predator.
struct EquilibriumScalars {
  double zeta1 = 0.0, zeta2 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;  ///< gamma1 = int g1 n2, gamma2 = int g2 n1
  double x1_star0 = 0.0, x2_star0 = 0.0;
  double u_star = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;

  /// a = 1/(x1*(0) gamma2)
  double a_gain() const { return 1.0 / lambda1; }
  /// b = zeta1 - zeta2 + a, which equals gamma1 x2*(0)
  double b_gain() const { return zeta1 - zeta2 + a_gain(); }

  json to_json() const;
};

/// Scalar part of the construction. SetpointError when x1*(0) <= 1/(zeta2 gamma2) or
/// the implied x2*(0) is not positive.
EquilibriumScalars equilibrium_scalars(double zeta1, double zeta2, double gamma1, double gamma2,
                                       double x1_star0);

struct EquilibriumSpec : EquilibriumScalars {
  AgeProfile x1_star, x2_star;  ///< x_i*(0) n_i(a)
};

EquilibriumSpec build_equilibrium(const SpeciesSpec& prey, const SpeciesSpec& predator, double x1_star0);
/// Same equilibrium parameterized by the dilution; needs 0 < u* < min(zeta1, zeta2).
EquilibriumSpec build_equilibrium_for_dilution(const SpeciesSpec& prey, const SpeciesSpec& predator,
                                               double u_star);

}  // namespace lsctl
