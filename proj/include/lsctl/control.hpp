#pragma once

#include <cstddef>

#include "lsctl/equilibrium.hpp"

namespace lsctl {

struct ControllerConfig {
  double beta = 1.0;
  double epsilon = 0.5;

  /// DomainError unless beta > epsilon / (4 (1 + epsilon)) and epsilon > 0.
  void validate() const;
  json to_json() const { return json{{"beta", beta}, {"epsilon", epsilon}}; }
};

struct EtaState {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// Every quantity of the perturbed law at errors (e1, e2), next to its nominal value.
///
/// The pairing <pi0_i, n_i> enters the reduced law only relative to its exact-root value;
/// it is carried as kappa_i (w_i + P_i) / w_i with w_i = <pi0_i, n_i>, which reduces to
/// kappa_i + P_i when the quadrature identity <pi0_i, n_i> = kappa_i holds exactly.
struct PerturbationLedger {
  double e1 = 0.0, e2 = 0.0;
  double zeta1_hat = 0.0, zeta2_hat = 0.0;
  double a = 0.0, a_hat = 0.0;
  double m1 = 0.0, m1_hat = 0.0;
  double m2 = 0.0, m2_hat = 0.0;
  double Gamma1 = 0.0, Gamma2 = 0.0;  ///< gamma1_hat - gamma1 (depends on e2), gamma2_hat - gamma2 (on e1)
  double K1 = 0.0, K2 = 0.0;          ///< kappa_i_hat - kappa_i
  double P1 = 0.0, P2 = 0.0;          ///< <pi0_i_hat - pi0_i, n_i>
  double zeta1 = 0.0, zeta2 = 0.0;

  /// (1+eps)(e1-e2) - eps(a_hat-a) - (m1_hat-m1)e^{-eta1} + (1+eps)(m2_hat-m2)e^{eta2}
  double delta_gain(const EtaState& eta, double epsilon) const;
  /// -e2 - (a_hat - a) + beta delta_gain: the control error assembled channel by channel.
  double delta_u(const EtaState& eta, const ControllerConfig& cfg) const;
  json to_json() const;
};

/// eta_i = ln(<pi0_i, x_i> / (x_i*(0) kappa_i)). DomainError if a pairing is not positive.
EtaState eta_from_populations(const AgeProfile& x1, const AgeProfile& x2, const EquilibriumSpec& eq,
                              const SpeciesSpec& prey, const SpeciesSpec& predator);

PerturbationLedger hatted_quantities(double e1, double e2, const SpeciesSpec& prey,
                                     const SpeciesSpec& predator, const EquilibriumScalars& eq);

/// zeta2_hat - a_hat + beta[(1+eps)(zeta2_hat - zeta1_hat) - eps a_hat - m1_hat e^{-eta1}
/// + (1+eps) m2_hat e^{eta2}]
double u_approx(const EtaState& eta, const PerturbationLedger& ledger, const ControllerConfig& cfg);

/// The law with exact operators, written in eta. Equals u* at eta = 0.
double u_nominal(const EtaState& eta, const ControllerConfig& cfg, const EquilibriumSpec& eq,
                 const SpeciesSpec& prey, const SpeciesSpec& predator);

/// The same law evaluated from the population pairings <pi0_i, x_i> directly.
double u_nominal_from_populations(const AgeProfile& x1, const AgeProfile& x2, const ControllerConfig& cfg,
                                  const EquilibriumSpec& eq, const SpeciesSpec& prey,
                                  const SpeciesSpec& predator);

/// max(u, 0), counting how often the floor was hit.
class DilutionClamp {
 public:
  double operator()(double u) {
    if (u < 0.0) {
      ++events_;
      return 0.0;
    }
    return u;
  }
  std::size_t events() const { return events_; }

 private:
  std::size_t events_ = 0;
};

}  // namespace lsctl
