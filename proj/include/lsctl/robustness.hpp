#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lsctl/dynamics.hpp"

namespace lsctl {

/// Points eta with V1(eta) = c on n_rays equally spaced directions.
std::vector<EtaState> level_set_boundary(double c, const LyapunovQuantities& lq, std::size_t n_rays = 256);

/// Error samples of the l1 ball |e1| + |e2| <= delta: origin, vertices, edge midpoints and a
/// 9x9 grid restricted to the ball.
std::vector<std::pair<double, double>> error_ball_samples(double delta);

struct CStarOptions {
  std::size_t n_rays = 256;
  std::size_t interior = 17;  ///< interior grid per axis in (e^{-eta1}, e^{eta2})
  double rel_tol = 1e-3;
};

/// Feasibility of a level c for an error budget delta: the sampled sublevel set lies in
/// D* = {r < min(a, b)} and u_approx >= 0 on it for every sampled error.
class CertificateProblem {
 public:
  CertificateProblem(double delta, const ControllerConfig& cfg, const EquilibriumScalars& eq,
                     const SpeciesSpec& prey, const SpeciesSpec& predator, CStarOptions opt = {});

  bool inside_D_star(double c) const;
  /// Minimum of u_approx over the sampled sublevel set and error samples.
  double min_control(double c) const;
  bool feasible(double c) const { return inside_D_star(c) && min_control(c) >= 0.0; }

  const LyapunovQuantities& lyapunov() const { return lq_; }
  const std::vector<PerturbationLedger>& ledgers() const { return ledgers_; }

 private:
  std::vector<EtaState> sample_sublevel_set(double c) const;

  double delta_;
  ControllerConfig cfg_;
  LyapunovQuantities lq_;
  CStarOptions opt_;
  std::vector<PerturbationLedger> ledgers_;
};

/// Largest feasible level within the relative tolerance; CertificateError if c = 1e-9 fails.
double compute_c_star(double delta, const ControllerConfig& cfg, const EquilibriumScalars& eq,
                      const SpeciesSpec& prey, const SpeciesSpec& predator, CStarOptions opt = {});

/// max r over the sampled boundary of the sublevel set (r is convex in (e^{-eta1}, e^{eta2}),
/// so its maximum over the set sits on the boundary).
double max_r_on_level(double c, const LyapunovQuantities& lq, std::size_t n_rays = 256);

struct ConstructiveCR {
  double C_R = 0.0;
  double L_a = 0.0, L_m1 = 0.0, L_m2 = 0.0, L_gain = 0.0;
  double gamma2_lower = 0.0, kappa2_lower = 0.0, pi1_lower = 0.0;
  double E1 = 0.0, E2 = 0.0;
  json to_json() const;
};

/// Bound C_R on |Delta_u| / (|e1| + |e2|) over T_R and the delta ball, assembled from the
/// zeta-sensitivity constants and operator bounds over [zeta_i - delta, zeta_i + delta].
ConstructiveCR constructive_C_R(double R, double delta, const SpeciesSpec& prey, const SpeciesSpec& predator,
                                const EquilibriumScalars& eq, const ControllerConfig& cfg);

struct CREstimate {
  double empirical = 0.0;
  ConstructiveCR constructive;
  bool consistent = false;  ///< empirical <= constructive
  std::size_t n_error_samples = 0;
};

/// Largest |Delta_u| / (|e1|+|e2|) over sampled errors; for each error the sup over T_R is
/// exact because Delta_u is affine in (e^{-eta1}, e^{eta2}) and T_R is a disc in (phi1, phi2).
CREstimate empirical_C_R(double R, double delta, const SpeciesSpec& prey, const SpeciesSpec& predator,
                         const EquilibriumScalars& eq, const ControllerConfig& cfg, std::size_t n_samples = 400,
                         std::uint64_t seed = 7);

/// sup over T_R of |Delta_u| for a fixed ledger.
double sup_delta_u_on_disc(const PerturbationLedger& ledger, double R, const LyapunovQuantities& lq,
                           const ControllerConfig& cfg);

struct RobustnessCertificate {
  double delta = 0.0;
  double c = 0.0;
  double c_star_delta = 0.0;
  double R_c = 0.0;
  double C_R = 0.0;
  double m_c = 0.0, M_c = 0.0;
  double B1 = 0.0, B2 = 0.0;
  double q = 0.0, q0 = 0.0;
  double beta_amplitude = 0.0;  ///< sqrt(M_c / m_c)
  double beta_decay = 0.0;      ///< lambda* / (4 M_c)
  double mu_c_delta = 0.0;
  double majorization_bound = 0.0;  ///< e^{3(B1+B2)} (q + 1/q)
  bool majorization_holds = false;
  double lambda_star = 0.0;
  double c_eps = 0.0;

  double beta_c(double s, double t) const { return beta_amplitude * std::exp(-beta_decay * t) * s; }
  json to_json() const;
};

RobustnessCertificate certificate_constants(double c, double delta, const LyapunovQuantities& lq, double C_R);

struct SweepOptions {
  double c_fraction = 0.9;  ///< certified level as a fraction of c*_delta
  std::size_t n_initial_conditions = 20;
  double horizon = 50.0;
  double dt = 1e-3;
  std::size_t record_every = 10;
  double tail_fraction = 0.1;
  CStarOptions c_star;
  unsigned jobs = 1;
};

/// Slack added to mu_c in the tail check; at delta = 0 the bound mu_c is 0 and r only tends to 0.
inline constexpr double kTailFloor = 1e-8;

struct SweepRow {
  double delta = 0.0;
  double c_star = 0.0;
  double c = 0.0;
  double R_c = 0.0;
  double C_R_empirical = 0.0;
  double C_R_constructive = 0.0;
  double max_V1_excursion = 0.0;  ///< max over runs and time of V1(t) / c
  std::size_t clamp_events = 0;
  double tail_r = 0.0;
  double mu_c = 0.0;
  std::size_t envelope_violations = 0;
  std::size_t runs = 0;
  RobustnessCertificate certificate;

  bool certified() const {
    return max_V1_excursion <= 1.0 + 1e-9 && clamp_events == 0 && tail_r <= mu_c + kTailFloor && envelope_violations == 0 &&
           C_R_empirical <= C_R_constructive;
  }
};

/// For each delta: c*_delta, a certified level, trajectories from the boundary of Omega_c under
/// the worst-corner errors (delta/2, -delta/2) and (-delta/2, delta/2), and the envelope checks.
std::vector<SweepRow> robustness_sweep(const std::vector<double>& deltas, const SpeciesSpec& prey,
                                       const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                       const ControllerConfig& cfg, const SweepOptions& opt = {});

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace lsctl
