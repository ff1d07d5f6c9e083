#include "lsctl/equilibrium.hpp"

#include <cmath>
#include <string>

#include "lsctl/errors.hpp"

namespace lsctl {

SpeciesSpec build_species(const AgeProfile& k, const AgeProfile& mu, const AgeProfile& g, double tol) {
  require_same_grid(k, mu, "build_species");
  require_same_grid(k, g, "build_species");
  SpeciesSpec s;
  s.k = k;
  s.mu = mu;
  s.g = g;
  s.root = g_ls(k, mu, tol);
  s.zeta = s.root.zeta;
  s.kappa = g_kappa(k, mu, s.zeta);
  s.n_profile = discount_profile(mu, s.zeta);
  s.pi0 = g_pi(k, mu, s.zeta);
  s.pi0_n = inner(s.pi0, s.n_profile);
  return s;
}

json EquilibriumScalars::to_json() const {
  return json{{"zeta1", zeta1},       {"zeta2", zeta2},       {"gamma1", gamma1},
              {"gamma2", gamma2},     {"x1_star0", x1_star0}, {"x2_star0", x2_star0},
              {"u_star", u_star},     {"lambda1", lambda1},   {"lambda2", lambda2},
              {"a_gain", a_gain()},   {"b_gain", b_gain()}};
}

EquilibriumScalars equilibrium_scalars(double zeta1, double zeta2, double gamma1, double gamma2,
                                       double x1_star0) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw SetpointError("equilibrium: interaction gains must be positive");
  const double threshold = 1.0 / (zeta2 * gamma2);
  if (!(x1_star0 > threshold)) {
    throw SetpointError("equilibrium: x1*(0) = " + std::to_string(x1_star0) +
                        " must exceed 1/(zeta2 gamma2) = " + std::to_string(threshold));
  }
  EquilibriumScalars e;
  e.zeta1 = zeta1;
  e.zeta2 = zeta2;
  e.gamma1 = gamma1;
  e.gamma2 = gamma2;
  e.x1_star0 = x1_star0;
  e.lambda1 = x1_star0 * gamma2;
  e.u_star = zeta2 - 1.0 / e.lambda1;
  e.x2_star0 = (zeta1 - e.u_star) / gamma1;
  if (!(e.x2_star0 > 0.0)) {
    throw SetpointError("equilibrium: implied x2*(0) = " + std::to_string(e.x2_star0) + " is not positive");
  }
  e.lambda2 = e.x2_star0 * gamma1;
  return e;
}

EquilibriumSpec build_equilibrium(const SpeciesSpec& prey, const SpeciesSpec& predator, double x1_star0) {
  require_same_grid(prey.k, predator.k, "build_equilibrium");
  const double gamma1 = g_gamma(prey.g, predator.zeta, predator.mu);
  const double gamma2 = g_gamma(predator.g, prey.zeta, prey.mu);
  EquilibriumSpec eq;
  static_cast<EquilibriumScalars&>(eq) = equilibrium_scalars(prey.zeta, predator.zeta, gamma1, gamma2, x1_star0);
  eq.x1_star = prey.n_profile.scaled(eq.x1_star0);
  eq.x2_star = predator.n_profile.scaled(eq.x2_star0);
  return eq;
}

EquilibriumSpec build_equilibrium_for_dilution(const SpeciesSpec& prey, const SpeciesSpec& predator,
                                               double u_star) {
  if (!(u_star > 0.0) || !(u_star < prey.zeta) || !(u_star < predator.zeta)) {
    throw SetpointError("equilibrium: dilution u* = " + std::to_string(u_star) +
                        " must lie in (0, min(zeta1, zeta2))");
  }
  const double gamma2 = g_gamma(predator.g, prey.zeta, prey.mu);
  return build_equilibrium(prey, predator, 1.0 / ((predator.zeta - u_star) * gamma2));
}

}  // namespace lsctl
