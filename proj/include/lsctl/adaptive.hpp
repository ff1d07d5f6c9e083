#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsctl/dynamics.hpp"

namespace lsctl {

/// Online estimates for one species, with the filter states of the mortality regression.
struct SpeciesEstimator {
  AgeProfile k_hat, mu_hat;
  std::vector<double> sigma, rho;  ///< sigma' = -alpha sigma + x, rho' = -alpha rho + r
  AgeProfile x_init;  ///< x at filter start, for the decaying transient in Y
  double gamma_k = 10.0;
  double gamma_mu = 10.0;
  double alpha = 5.0;
  double transient = 1.0;  ///< (1 - alpha dt)^n, the discrete e^{-alpha t}
  std::size_t clamp_events = 0;

  /// Zero filters started at x0.
  static SpeciesEstimator start(const AgeProfile& k_hat, const AgeProfile& mu_hat, const AgeProfile& x0,
                                double gamma_k = 10.0, double gamma_mu = 10.0, double alpha = 5.0);
  /// Y = rho - x + alpha sigma + transient x_init
  std::vector<double> regression_target(const AgeProfile& x) const;
};

struct AdaptiveState {
  std::array<SpeciesEstimator, 2> species;
  double t = 0.0;
};

/// x(0) - int k_hat x
double boundary_prediction_error(const SpeciesEstimator& est, const AgeProfile& x);

/// Euler step of k_hat' = Gamma_k x / (1 + int x^2) (x(0) - int k_hat x); clamped at 0.
/// Returns the boundary prediction error before the step.
double update_k_hat(SpeciesEstimator& est, const AgeProfile& x, double dt);

/// r = -d_a x - loss x with an upwind difference; node 0 carries no transport and is set to 0.
/// loss is u + int g1 x2 for the prey and u + 1/int g2 x1 for the predator.
std::vector<double> transport_residual(const AgeProfile& x, double loss);

/// Euler step of mu_hat' = Gamma_mu sigma/(1+sigma^2) (Y - mu_hat sigma) at every node, then of the
/// filters. Node 0 has no regression of its own and moves with node 1. mu_hat is clamped at 0.
void update_mu_hat(SpeciesEstimator& est, const AgeProfile& x, std::span<const double> r, double dt);

/// zeta from (k, mu); an empty function means the exact solver.
using ZetaEstimator = std::function<double(const AgeProfile& k, const AgeProfile& mu)>;

struct AdaptiveConfig {
  double horizon = 10.0;
  std::size_t record_every = 1;
  double gamma_k = 10.0;
  double gamma_mu = 10.0;
  double alpha = 5.0;
  /// The estimator is trusted only where R0(k_hat, mu_hat) exceeds this; below it the exact
  /// solver is used instead.
  double estimator_r0_min = 1.2;
  bool project_boundary = true;
  /// Steps at which the estimates are copied into the trajectory, ascending.
  std::vector<std::size_t> snapshot_steps;
};

struct EstimateSnapshot {
  double t = 0.0;
  std::array<AgeProfile, 2> k_hat, mu_hat;
};

struct AdaptiveTrajectory : PdeTrajectory {
  std::vector<double> zeta1_hat, zeta2_hat;
  std::vector<double> k1_err_sup, k2_err_sup, mu1_err_sup, mu2_err_sup;
  std::vector<double> bp1_err, bp2_err;  ///< |x_i(0) - int k_hat_i x_i|
  std::vector<double> fallbacks;         ///< cumulative estimator fallbacks at each record
  std::size_t estimator_fallbacks = 0;   ///< estimator skipped for the exact solver
  std::size_t held_estimates = 0;        ///< no usable zeta_hat, previous value kept
  std::size_t estimate_clamps = 0;
  std::vector<std::string> warnings;
  std::vector<EstimateSnapshot> snapshots;
  AdaptiveState final_estimates;
};

/// Closed loop with online estimates. Each step: zeta_hat_i from (k_hat_i, mu_hat_i), the hatted
/// ledger at e_i = zeta_hat_i - zeta_i, u = clamp(u_approx), estimator and filter updates, then one
/// upwind PDE step of the true plant.
AdaptiveTrajectory simulate_adaptive(const PopulationState& ic, const std::array<AgeProfile, 2>& k_hat0,
                                     const std::array<AgeProfile, 2>& mu_hat0, const SpeciesSpec& prey,
                                     const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                     const ControllerConfig& cfg, const AdaptiveConfig& acfg,
                                     const ZetaEstimator& estimator = {});

/// Trajectory columns plus zeta1_hat, zeta2_hat, k1_err_sup, k2_err_sup, mu1_err_sup, mu2_err_sup,
/// surrogate_fallbacks, bp1_err, bp2_err.
void write_adaptive_csv(const std::string& path, const AdaptiveTrajectory& tr);

}  // namespace lsctl
