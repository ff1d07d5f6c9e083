#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "lsctl/control.hpp"

namespace lsctl {

struct LyapunovQuantities {
  double a_gain = 0.0;
  double b_gain = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  std::array<std::array<double, 2>, 2> Q{};
  double lambda_star = 0.0;  ///< smaller eigenvalue of Q
  double c_eps = 0.0;        ///< sqrt(1 + (1+eps)^2)

  static LyapunovQuantities from_gains(double a_gain, double b_gain, const ControllerConfig& cfg);
  static LyapunovQuantities from_equilibrium(const EquilibriumScalars& eq, const ControllerConfig& cfg);
  double det_Q() const { return Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0]; }
  /// [phi1 phi2] Q [phi1 phi2]^T
  double quadratic_form(double phi1, double phi2) const;
};

struct Phi {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// phi1 = a(1 - e^{-eta1}), phi2 = b(e^{eta2} - 1).
Phi phi(const EtaState& eta, const LyapunovQuantities& lq);
/// r = |(phi1, phi2)|
double r_of(const EtaState& eta, const LyapunovQuantities& lq);
/// V1 = a(e^{-eta1} + eta1 - 1) + (1+eps) b (e^{eta2} - eta2 - 1)
double lyapunov_v1(const EtaState& eta, const LyapunovQuantities& lq);

struct EtaRates {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Reduced dynamics on the manifold x_i proportional to n_i:
/// eta1' = zeta1 - b e^{eta2} - u, eta2' = zeta2 - a e^{-eta1} - u.
EtaRates eta_rhs(const EtaState& eta, double u, const EquilibriumScalars& eq);
/// The nominal closed loop in phi form: eta1' = -beta phi1 - (1 + beta(1+eps)) phi2,
/// eta2' = (1 - beta) phi1 - beta (1+eps) phi2.
EtaRates nominal_closed_loop_rhs(const EtaState& eta, const LyapunovQuantities& lq);

struct EtaTrajectory {
  std::vector<double> t, eta1, eta2, u, V1, r;
  std::size_t clamp_events = 0;
  EtaState final_state;
};

struct EtaIntegrationOptions {
  double horizon = 50.0;
  double dt = 1e-3;
  std::size_t record_every = 1;  ///< keep every k-th step (the final step is always kept)
};

/// Classical RK4 on eta' = eta_rhs(eta, clamp(u_approx(eta))). BlowupError if |eta| > 1e6.
EtaTrajectory integrate_eta(const EtaState& eta0, const EquilibriumScalars& eq, const ControllerConfig& cfg,
                            const PerturbationLedger& ledger, const EtaIntegrationOptions& opt = {});

struct PopulationState {
  AgeProfile x1, x2;
  double t = 0.0;
};

enum class PdeScheme {
  /// Exact transport along characteristics with exponential decay over each cell.
  exponential,
  /// First-order upwind transport with explicit Euler losses, x_j' = x_{j-1} - h c_j x_j.
  upwind,
};

const char* to_string(PdeScheme s);
PdeScheme pde_scheme_from_string(const std::string& s);

/// Interaction terms at the current state: prey loss int g1 x2, predator loss 1/int g2 x1.
/// ExtinctionError if int g2 x1 < 1e-12.
std::array<double, 2> interaction_rates(const PopulationState& s, const SpeciesSpec& prey,
                                        const SpeciesSpec& predator);

/// Newborn density consistent with the renewal condition x(0) = int k x, given the rest of x.
double renewal_boundary(const AgeProfile& k, std::span<const double> x);

/// One step of length dt = h. Interactions are evaluated at the current time.
PopulationState pde_step(const PopulationState& s, double u, const SpeciesSpec& prey, const SpeciesSpec& predator,
                         double dt, PdeScheme scheme = PdeScheme::exponential);

struct PdeTrajectory {
  std::vector<double> t, eta1, eta2, u, u_raw, V1, r, x1_boundary, x2_boundary, x1_total, x2_total;
  std::size_t clamp_events = 0;
  PopulationState final_state;
};

struct PdeRunOptions {
  double horizon = 10.0;
  PdeScheme scheme = PdeScheme::exponential;
  std::size_t record_every = 1;
  bool project_boundary = true;  ///< replace x_i(0) of the initial data by its renewal value
};

/// Closed loop: eta from the populations, u = clamp(u_approx(eta, ledger)), one PDE step.
PdeTrajectory simulate_closed_loop_pde(const PopulationState& ic, const SpeciesSpec& prey,
                                       const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                       const ControllerConfig& cfg, const PerturbationLedger& ledger,
                                       const PdeRunOptions& opt = {});

/// Initial condition with the boundary nodes replaced by their renewal values.
PopulationState project_initial_condition(const PopulationState& ic, const SpeciesSpec& prey,
                                          const SpeciesSpec& predator);

/// Writes the columns t, eta1, eta2, u, V1, r, x1_boundary, x2_boundary, x1_total, x2_total.
void write_trajectory_csv(const std::string& path, const PdeTrajectory& tr);
void write_eta_trajectory_csv(const std::string& path, const EtaTrajectory& tr);

/// One header line, then one row per index; all columns must have equal length.
void write_csv_columns(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& cols);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace lsctl
