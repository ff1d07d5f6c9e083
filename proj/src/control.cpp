#include "lsctl/control.hpp"

#include <cmath>
#include <string>

#include "lsctl/errors.hpp"

namespace lsctl {

void ControllerConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("controller: epsilon must be positive");
  if (!(beta > epsilon / (4.0 * (1.0 + epsilon))) || !std::isfinite(beta)) {
    throw DomainError("controller: beta = " + std::to_string(beta) + " must exceed eps/(4(1+eps)) = " +
                      std::to_string(epsilon / (4.0 * (1.0 + epsilon))));
  }
}

double PerturbationLedger::delta_gain(const EtaState& eta, double eps) const {
  return (1.0 + eps) * (e1 - e2) - eps * (a_hat - a) - (m1_hat - m1) * std::exp(-eta.eta1) +
         (1.0 + eps) * (m2_hat - m2) * std::exp(eta.eta2);
}

double PerturbationLedger::delta_u(const EtaState& eta, const ControllerConfig& cfg) const {
  return -e2 - (a_hat - a) + cfg.beta * delta_gain(eta, cfg.epsilon);
}

json PerturbationLedger::to_json() const {
  return json{{"e1", e1},         {"e2", e2},         {"zeta1_hat", zeta1_hat}, {"zeta2_hat", zeta2_hat},
              {"a", a},           {"a_hat", a_hat},   {"m1", m1},               {"m1_hat", m1_hat},
              {"m2", m2},         {"m2_hat", m2_hat}, {"Gamma1", Gamma1},       {"Gamma2", Gamma2},
              {"K1", K1},         {"K2", K2},         {"P1", P1},               {"P2", P2}};
}

EtaState eta_from_populations(const AgeProfile& x1, const AgeProfile& x2, const EquilibriumSpec& eq,
                              const SpeciesSpec& prey, const SpeciesSpec& predator) {
  const double p1 = inner(prey.pi0, x1);
  const double p2 = inner(predator.pi0, x2);
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw DomainError("eta_from_populations: <pi0_i, x_i> must be positive");
  return {std::log(p1 / (eq.x1_star0 * prey.kappa)), std::log(p2 / (eq.x2_star0 * predator.kappa))};
}

PerturbationLedger hatted_quantities(double e1, double e2, const SpeciesSpec& prey, const SpeciesSpec& predator,
                                     const EquilibriumScalars& eq) {
  PerturbationLedger L;
  L.e1 = e1;
  L.e2 = e2;
  L.zeta1 = eq.zeta1;
  L.zeta2 = eq.zeta2;
  L.zeta1_hat = eq.zeta1 - e1;
  L.zeta2_hat = eq.zeta2 - e2;

  const double gamma1_hat = g_gamma(prey.g, L.zeta2_hat, predator.mu);
  const double gamma2_hat = g_gamma(predator.g, L.zeta1_hat, prey.mu);
  const double kappa1_hat = g_kappa(prey.k, prey.mu, L.zeta1_hat);
  const double kappa2_hat = g_kappa(predator.k, predator.mu, L.zeta2_hat);
  L.Gamma1 = gamma1_hat - eq.gamma1;
  L.Gamma2 = gamma2_hat - eq.gamma2;
  L.K1 = kappa1_hat - prey.kappa;
  L.K2 = kappa2_hat - predator.kappa;
  if (e1 != 0.0) L.P1 = inner(g_pi(prey.k, prey.mu, L.zeta1_hat), prey.n_profile) - prey.pi0_n;
  if (e2 != 0.0) L.P2 = inner(g_pi(predator.k, predator.mu, L.zeta2_hat), predator.n_profile) - predator.pi0_n;

  const double pair1_hat = prey.kappa * (prey.pi0_n + L.P1) / prey.pi0_n;
  const double pair2_hat = predator.kappa * (predator.pi0_n + L.P2) / predator.pi0_n;
  if (!(gamma2_hat > 0.0)) throw DomainError("hatted_quantities: gamma2 + Gamma2 <= 0");
  if (!(kappa2_hat > 0.0)) throw DomainError("hatted_quantities: kappa2 + K2 <= 0");
  if (!(pair1_hat > 0.0)) throw DomainError("hatted_quantities: <pi0_1, n_1> + P1 <= 0");

  L.a = 1.0 / (eq.x1_star0 * eq.gamma2);
  L.a_hat = 1.0 / (eq.x1_star0 * gamma2_hat);
  L.m1 = L.a;
  L.m1_hat = kappa1_hat / (eq.x1_star0 * gamma2_hat * pair1_hat);
  L.m2 = eq.gamma1 * eq.x2_star0;
  L.m2_hat = gamma1_hat * eq.x2_star0 * pair2_hat / kappa2_hat;
  return L;
}

double u_approx(const EtaState& eta, const PerturbationLedger& L, const ControllerConfig& cfg) {
  const double eps = cfg.epsilon;
  return L.zeta2_hat - L.a_hat +
         cfg.beta * ((1.0 + eps) * (L.zeta2_hat - L.zeta1_hat) - eps * L.a_hat - L.m1_hat * std::exp(-eta.eta1) +
                     (1.0 + eps) * L.m2_hat * std::exp(eta.eta2));
}

double u_nominal(const EtaState& eta, const ControllerConfig& cfg, const EquilibriumSpec& eq, const SpeciesSpec&,
                 const SpeciesSpec&) {
  const double eps = cfg.epsilon;
  const double a = 1.0 / (eq.x1_star0 * eq.gamma2);
  const double b = eq.gamma1 * eq.x2_star0;
  return eq.zeta2 - a +
         cfg.beta * ((1.0 + eps) * (eq.zeta2 - eq.zeta1) - eps * a - a * std::exp(-eta.eta1) +
                     (1.0 + eps) * b * std::exp(eta.eta2));
}

double u_nominal_from_populations(const AgeProfile& x1, const AgeProfile& x2, const ControllerConfig& cfg,
                                  const EquilibriumSpec& eq, const SpeciesSpec& prey,
                                  const SpeciesSpec& predator) {
  const double eps = cfg.epsilon;
  const double p1 = inner(prey.pi0, x1);
  const double p2 = inner(predator.pi0, x2);
  if (!(p1 > 0.0)) throw DomainError("u_nominal_from_populations: <pi0_1, x_1> must be positive");
  return eq.zeta2 - 1.0 / (eq.x1_star0 * eq.gamma2) +
         cfg.beta * ((1.0 + eps) * (eq.zeta2 - eq.zeta1) - eps / (eq.x1_star0 * eq.gamma2) -
                     prey.kappa / (eq.gamma2 * p1) + (1.0 + eps) * eq.gamma1 / predator.kappa * p2);
}

}  // namespace lsctl
