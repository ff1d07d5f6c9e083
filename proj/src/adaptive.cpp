#include "lsctl/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "lsctl/errors.hpp"
#include "lsctl/operators.hpp"

namespace lsctl {

namespace {

double sup_diff(const AgeProfile& a, const AgeProfile& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

SpeciesEstimator SpeciesEstimator::start(const AgeProfile& k_hat, const AgeProfile& mu_hat, const AgeProfile& x0,
                                         double gamma_k, double gamma_mu, double alpha) {
  require_same_grid(k_hat, mu_hat, "SpeciesEstimator");
  require_same_grid(k_hat, x0, "SpeciesEstimator");
  if (!(gamma_k > 0.0) || !(gamma_mu > 0.0) || !(alpha > 0.0)) {
    throw DomainError("SpeciesEstimator: gains and filter pole must be positive");
  }
  SpeciesEstimator e;
  e.k_hat = k_hat;
  e.mu_hat = mu_hat;
  e.x_init = x0;
  e.sigma.assign(x0.size(), 0.0);
  e.rho.assign(x0.size(), 0.0);
  e.gamma_k = gamma_k;
  e.gamma_mu = gamma_mu;
  e.alpha = alpha;
  return e;
}

std::vector<double> SpeciesEstimator::regression_target(const AgeProfile& x) const {
  std::vector<double> y(x.size());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = rho[j] - x[j] + alpha * sigma[j] + transient * x_init[j];
  return y;
}

double boundary_prediction_error(const SpeciesEstimator& est, const AgeProfile& x) {
  return x.front() - inner(est.k_hat, x);
}

double update_k_hat(SpeciesEstimator& est, const AgeProfile& x, double dt) {
  if (!(dt > 0.0)) throw DomainError("update_k_hat: dt must be positive");
  require_same_grid(est.k_hat, x, "update_k_hat");
  const double err = boundary_prediction_error(est, x);
  const double gain = dt * est.gamma_k * err / (1.0 + inner(x, x));
  std::vector<double> k = est.k_hat.vector();
  for (std::size_t j = 0; j < k.size(); ++j) {
    k[j] += gain * x[j];
    if (k[j] < 0.0) {
      k[j] = 0.0;
      ++est.clamp_events;
    }
  }
  est.k_hat = AgeProfile(x.grid(), std::move(k));
  return err;
}

std::vector<double> transport_residual(const AgeProfile& x, double loss) {
  const double h = x.grid().spacing();
  std::vector<double> r(x.size(), 0.0);
  for (std::size_t j = 1; j < r.size(); ++j) r[j] = -(x[j] - x[j - 1]) / h - loss * x[j];
  return r;
}

void update_mu_hat(SpeciesEstimator& est, const AgeProfile& x, std::span<const double> r, double dt) {
  if (!(dt > 0.0)) throw DomainError("update_mu_hat: dt must be positive");
  require_same_grid(est.mu_hat, x, "update_mu_hat");
  if (r.size() != x.size()) throw ShapeError("update_mu_hat: residual has the wrong length");
  const std::vector<double> y = est.regression_target(x);
  std::vector<double> mu = est.mu_hat.vector();
  std::vector<double> step(mu.size(), 0.0);
  for (std::size_t j = 1; j < mu.size(); ++j) {
    const double s = est.sigma[j];
    step[j] = dt * est.gamma_mu * s / (1.0 + s * s) * (y[j] - mu[j] * s);
  }
  if (mu.size() > 1) step[0] = step[1];
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mu[j] += step[j];
    if (mu[j] < 0.0) {
      mu[j] = 0.0;
      ++est.clamp_events;
    }
  }
  est.mu_hat = AgeProfile(x.grid(), std::move(mu));
  for (std::size_t j = 0; j < x.size(); ++j) {
    est.sigma[j] += dt * (-est.alpha * est.sigma[j] + x[j]);
    est.rho[j] += dt * (-est.alpha * est.rho[j] + r[j]);
  }
  est.transient *= 1.0 - est.alpha * dt;
}

AdaptiveTrajectory simulate_adaptive(const PopulationState& ic, const std::array<AgeProfile, 2>& k_hat0,
                                     const std::array<AgeProfile, 2>& mu_hat0, const SpeciesSpec& prey,
                                     const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                     const ControllerConfig& cfg, const AdaptiveConfig& acfg,
                                     const ZetaEstimator& estimator) {
  cfg.validate();
  const LyapunovQuantities lq = LyapunovQuantities::from_equilibrium(eq, cfg);
  const double h = prey.grid().spacing();
  if (acfg.alpha * h >= 1.0) throw DomainError("simulate_adaptive: alpha h must be below 1");
  PopulationState s = acfg.project_boundary ? project_initial_condition(ic, prey, predator) : ic;

  AdaptiveTrajectory tr;
  AdaptiveState st;
  st.species[0] = SpeciesEstimator::start(k_hat0[0], mu_hat0[0], s.x1, acfg.gamma_k, acfg.gamma_mu, acfg.alpha);
  st.species[1] = SpeciesEstimator::start(k_hat0[1], mu_hat0[1], s.x2, acfg.gamma_k, acfg.gamma_mu, acfg.alpha);
  std::array<double, 2> zeta_hat{};
  PerturbationLedger ledger;

  auto estimate = [&](int i) -> bool {
    const SpeciesEstimator& e = st.species[i];
    if (estimator && net_reproduction_number(e.k_hat, e.mu_hat) > acfg.estimator_r0_min) {
      zeta_hat[i] = estimator(e.k_hat, e.mu_hat);
      return true;
    }
    if (estimator) {
      ++tr.estimator_fallbacks;
      if (tr.warnings.size() < 20) {
        tr.warnings.push_back("t = " + format_double(s.t) + ": species " + std::to_string(i + 1) +
                              " estimates left the estimator domain; using the exact solver");
      }
    }
    try {
      zeta_hat[i] = g_ls(e.k_hat, e.mu_hat).zeta;
      return true;
    } catch (const DomainError&) {
      ++tr.held_estimates;
      return false;
    }
  };

  DilutionClamp clamp;
  const auto steps = static_cast<std::size_t>(std::llround(acfg.horizon / h));
  const std::size_t every = std::max<std::size_t>(1, acfg.record_every);
  std::size_t next_snapshot = 0;
  for (std::size_t n = 0;; ++n) {
    while (next_snapshot < acfg.snapshot_steps.size() && acfg.snapshot_steps[next_snapshot] <= n) {
      if (acfg.snapshot_steps[next_snapshot++] == n) {
        tr.snapshots.push_back({s.t,
                                {st.species[0].k_hat, st.species[1].k_hat},
                                {st.species[0].mu_hat, st.species[1].mu_hat}});
      }
    }
    const bool ok1 = estimate(0), ok2 = estimate(1);
    if (n == 0 && !(ok1 && ok2)) throw DomainError("simulate_adaptive: initial estimates are not in set B");
    if (ok1 && ok2) {
      try {
        ledger = hatted_quantities(zeta_hat[0] - prey.zeta, zeta_hat[1] - predator.zeta, prey, predator, eq);
      } catch (const DomainError&) {
        if (n == 0) throw;
        ++tr.held_estimates;
      }
    }
    const EtaState eta = eta_from_populations(s.x1, s.x2, eq, prey, predator);
    const double raw = u_approx(eta, ledger, cfg);
    const double u = clamp(raw);

    if (n % every == 0 || n == steps) {
      tr.t.push_back(s.t);
      tr.eta1.push_back(eta.eta1);
      tr.eta2.push_back(eta.eta2);
      tr.u.push_back(u);
      tr.u_raw.push_back(raw);
      tr.V1.push_back(lyapunov_v1(eta, lq));
      tr.r.push_back(r_of(eta, lq));
      tr.x1_boundary.push_back(s.x1[0]);
      tr.x2_boundary.push_back(s.x2[0]);
      tr.x1_total.push_back(integrate(s.x1));
      tr.x2_total.push_back(integrate(s.x2));
      tr.zeta1_hat.push_back(zeta_hat[0]);
      tr.zeta2_hat.push_back(zeta_hat[1]);
      tr.k1_err_sup.push_back(sup_diff(st.species[0].k_hat, prey.k));
      tr.k2_err_sup.push_back(sup_diff(st.species[1].k_hat, predator.k));
      tr.mu1_err_sup.push_back(sup_diff(st.species[0].mu_hat, prey.mu));
      tr.mu2_err_sup.push_back(sup_diff(st.species[1].mu_hat, predator.mu));
      tr.bp1_err.push_back(std::abs(boundary_prediction_error(st.species[0], s.x1)));
      tr.bp2_err.push_back(std::abs(boundary_prediction_error(st.species[1], s.x2)));
      tr.fallbacks.push_back(static_cast<double>(tr.estimator_fallbacks));
    }
    if (n == steps) break;

    const auto I = interaction_rates(s, prey, predator);
    const std::array<const AgeProfile*, 2> x{&s.x1, &s.x2};
    for (int i = 0; i < 2; ++i) {
      update_k_hat(st.species[i], *x[i], h);
      update_mu_hat(st.species[i], *x[i], transport_residual(*x[i], u + I[i]), h);
    }
    s = pde_step(s, u, prey, predator, h, PdeScheme::upwind);
    st.t = s.t;
  }
  tr.clamp_events = clamp.events();
  tr.estimate_clamps = st.species[0].clamp_events + st.species[1].clamp_events;
  tr.final_state = s;
  tr.final_estimates = st;
  return tr;
}

void write_adaptive_csv(const std::string& path, const AdaptiveTrajectory& tr) {
  write_csv_columns(path,
                    {"t", "eta1", "eta2", "u", "V1", "r", "x1_boundary", "x2_boundary", "x1_total", "x2_total",
                     "zeta1_hat", "zeta2_hat", "k1_err_sup", "k2_err_sup", "mu1_err_sup", "mu2_err_sup",
                     "surrogate_fallbacks", "bp1_err", "bp2_err"},
                    {&tr.t, &tr.eta1, &tr.eta2, &tr.u, &tr.V1, &tr.r, &tr.x1_boundary, &tr.x2_boundary,
                     &tr.x1_total, &tr.x2_total, &tr.zeta1_hat, &tr.zeta2_hat, &tr.k1_err_sup, &tr.k2_err_sup,
                     &tr.mu1_err_sup, &tr.mu2_err_sup, &tr.fallbacks, &tr.bp1_err, &tr.bp2_err});
}

}  // namespace lsctl
