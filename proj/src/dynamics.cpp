#include "lsctl/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "lsctl/errors.hpp"

namespace lsctl {

LyapunovQuantities LyapunovQuantities::from_gains(double a_gain, double b_gain, const ControllerConfig& cfg) {
  LyapunovQuantities lq;
  lq.a_gain = a_gain;
  lq.b_gain = b_gain;
  lq.beta = cfg.beta;
  lq.epsilon = cfg.epsilon;
  const double e1 = 1.0 + cfg.epsilon;
  const double off = (2.0 * cfg.beta * e1 - cfg.epsilon) / 2.0;
  lq.Q = {{{cfg.beta, off}, {off, cfg.beta * e1 * e1}}};
  const double tr = lq.Q[0][0] + lq.Q[1][1];
  const double disc = std::hypot(lq.Q[0][0] - lq.Q[1][1], 2.0 * off);
  const double lmax = 0.5 * (tr + disc);
  lq.lambda_star = lmax > 0.0 ? lq.det_Q() / lmax : 0.5 * (tr - disc);
  lq.c_eps = std::sqrt(1.0 + e1 * e1);
  return lq;
}

LyapunovQuantities LyapunovQuantities::from_equilibrium(const EquilibriumScalars& eq, const ControllerConfig& cfg) {
  return from_gains(eq.a_gain(), eq.b_gain(), cfg);
}

double LyapunovQuantities::quadratic_form(double p1, double p2) const {
  return Q[0][0] * p1 * p1 + 2.0 * Q[0][1] * p1 * p2 + Q[1][1] * p2 * p2;
}

Phi phi(const EtaState& eta, const LyapunovQuantities& lq) {
  return {-lq.a_gain * std::expm1(-eta.eta1), lq.b_gain * std::expm1(eta.eta2)};
}

double r_of(const EtaState& eta, const LyapunovQuantities& lq) {
  const Phi p = phi(eta, lq);
  return std::hypot(p.phi1, p.phi2);
}

double lyapunov_v1(const EtaState& eta, const LyapunovQuantities& lq) {
  return lq.a_gain * (std::expm1(-eta.eta1) + eta.eta1) +
         (1.0 + lq.epsilon) * lq.b_gain * (std::expm1(eta.eta2) - eta.eta2);
}

EtaRates eta_rhs(const EtaState& eta, double u, const EquilibriumScalars& eq) {
  return {eq.zeta1 - eq.b_gain() * std::exp(eta.eta2) - u, eq.zeta2 - eq.a_gain() * std::exp(-eta.eta1) - u};
}

EtaRates nominal_closed_loop_rhs(const EtaState& eta, const LyapunovQuantities& lq) {
  const Phi p = phi(eta, lq);
  const double e1 = 1.0 + lq.epsilon;
  return {-lq.beta * p.phi1 - (1.0 + lq.beta * e1) * p.phi2, (1.0 - lq.beta) * p.phi1 - lq.beta * e1 * p.phi2};
}

EtaTrajectory integrate_eta(const EtaState& eta0, const EquilibriumScalars& eq, const ControllerConfig& cfg,
                            const PerturbationLedger& ledger, const EtaIntegrationOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.horizon > 0.0)) throw DomainError("integrate_eta: dt and horizon must be positive");
  const LyapunovQuantities lq = LyapunovQuantities::from_equilibrium(eq, cfg);
  DilutionClamp clamp;
  auto rhs = [&](const EtaState& e) { return eta_rhs(e, clamp(u_approx(e, ledger, cfg)), eq); };

  EtaTrajectory tr;
  auto record = [&](double t, const EtaState& e) {
    tr.t.push_back(t);
    tr.eta1.push_back(e.eta1);
    tr.eta2.push_back(e.eta2);
    tr.u.push_back(std::max(0.0, u_approx(e, ledger, cfg)));
    tr.V1.push_back(lyapunov_v1(e, lq));
    tr.r.push_back(r_of(e, lq));
  };

  const auto steps = static_cast<std::size_t>(std::llround(opt.horizon / opt.dt));
  const double h = opt.dt;
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  EtaState e = eta0;
  record(0.0, e);
  for (std::size_t n = 1; n <= steps; ++n) {
    const EtaRates k1 = rhs(e);
    const EtaRates k2 = rhs({e.eta1 + 0.5 * h * k1.d1, e.eta2 + 0.5 * h * k1.d2});
    const EtaRates k3 = rhs({e.eta1 + 0.5 * h * k2.d1, e.eta2 + 0.5 * h * k2.d2});
    const EtaRates k4 = rhs({e.eta1 + h * k3.d1, e.eta2 + h * k3.d2});
    e.eta1 += h / 6.0 * (k1.d1 + 2.0 * k2.d1 + 2.0 * k3.d1 + k4.d1);
    e.eta2 += h / 6.0 * (k1.d2 + 2.0 * k2.d2 + 2.0 * k3.d2 + k4.d2);
    if (!(std::abs(e.eta1) <= 1e6) || !(std::abs(e.eta2) <= 1e6)) {
      throw BlowupError("integrate_eta: |eta| exceeded 1e6 at t = " + std::to_string(n * h));
    }
    if (n % every == 0 || n == steps) record(static_cast<double>(n) * h, e);
  }
  tr.clamp_events = clamp.events();
  tr.final_state = e;
  return tr;
}

const char* to_string(PdeScheme s) { return s == PdeScheme::exponential ? "exponential" : "upwind"; }

PdeScheme pde_scheme_from_string(const std::string& s) {
  if (s == "exponential") return PdeScheme::exponential;
  if (s == "upwind") return PdeScheme::upwind;
  throw DomainError("unknown PDE scheme '" + s + "'");
}

std::array<double, 2> interaction_rates(const PopulationState& s, const SpeciesSpec& prey,
                                        const SpeciesSpec& predator) {
  const double prey_loss = inner(prey.g, s.x2);
  const double food = inner(predator.g, s.x1);
  if (!(food >= 1e-12)) throw ExtinctionError("predator food integral int g2 x1 fell below 1e-12");
  return {prey_loss, 1.0 / food};
}

double renewal_boundary(const AgeProfile& k, std::span<const double> x) {
  const double h = k.grid().spacing();
  const std::size_t N = k.size();
  double s = 0.5 * h * k[N - 1] * x[N - 1];
  for (std::size_t j = 1; j + 1 < N; ++j) s += h * k[j] * x[j];
  const double denom = 1.0 - 0.5 * h * k[0];
  if (!(denom > 0.0)) throw DomainError("renewal boundary: grid too coarse for k(0) (h k(0)/2 >= 1)");
  return s / denom;
}

namespace {

std::vector<double> advance(const AgeProfile& x, const SpeciesSpec& sp, double loss, PdeScheme scheme) {
  const double h = x.grid().spacing();
  const std::size_t N = x.size();
  std::vector<double> y(N);
  if (scheme == PdeScheme::exponential) {
    for (std::size_t j = 1; j < N; ++j) {
      const double mu_mid = 0.5 * (sp.mu[j - 1] + sp.mu[j]);
      y[j] = x[j - 1] * std::exp(-h * (mu_mid + loss));
    }
  } else {
    for (std::size_t j = 1; j < N; ++j) {
      y[j] = x[j - 1] - h * (sp.mu[j] + loss) * x[j];
      if (y[j] < 0.0) throw DomainError("upwind step lost positivity; refine the grid");
    }
  }
  y[0] = renewal_boundary(sp.k, y);
  return y;
}

}  // namespace

PopulationState pde_step(const PopulationState& s, double u, const SpeciesSpec& prey, const SpeciesSpec& predator,
                         double dt, PdeScheme scheme) {
  const double h = prey.grid().spacing();
  if (std::abs(dt - h) > 1e-12 * h) throw DomainError("pde_step: dt must equal the age spacing h");
  require_same_grid(s.x1, prey.k, "pde_step");
  require_same_grid(s.x2, predator.k, "pde_step");
  const auto I = interaction_rates(s, prey, predator);
  PopulationState next;
  next.x1 = AgeProfile(s.x1.grid(), advance(s.x1, prey, u + I[0], scheme));
  next.x2 = AgeProfile(s.x2.grid(), advance(s.x2, predator, u + I[1], scheme));
  next.t = s.t + dt;
  return next;
}

PopulationState project_initial_condition(const PopulationState& ic, const SpeciesSpec& prey,
                                          const SpeciesSpec& predator) {
  std::vector<double> x1 = ic.x1.vector(), x2 = ic.x2.vector();
  x1[0] = renewal_boundary(prey.k, x1);
  x2[0] = renewal_boundary(predator.k, x2);
  return {AgeProfile(ic.x1.grid(), std::move(x1)), AgeProfile(ic.x2.grid(), std::move(x2)), ic.t};
}

PdeTrajectory simulate_closed_loop_pde(const PopulationState& ic, const SpeciesSpec& prey,
                                       const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                       const ControllerConfig& cfg, const PerturbationLedger& ledger,
                                       const PdeRunOptions& opt) {
  const LyapunovQuantities lq = LyapunovQuantities::from_equilibrium(eq, cfg);
  const double h = prey.grid().spacing();
  PopulationState s = opt.project_boundary ? project_initial_condition(ic, prey, predator) : ic;
  DilutionClamp clamp;
  PdeTrajectory tr;
  const auto steps = static_cast<std::size_t>(std::llround(opt.horizon / h));
  const std::size_t every = std::max<std::size_t>(1, opt.record_every);
  for (std::size_t n = 0;; ++n) {
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
    }
    if (n == steps) break;
    s = pde_step(s, u, prey, predator, h, opt.scheme);
  }
  tr.clamp_events = clamp.events();
  tr.final_state = s;
  return tr;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv_columns(const std::string& path, const std::vector<std::string>& names,
                   const std::vector<const std::vector<double>*>& cols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  const std::size_t rows = cols.front()->size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << format_double((*cols[c])[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_trajectory_csv(const std::string& path, const PdeTrajectory& tr) {
  write_csv_columns(path, {"t", "eta1", "eta2", "u", "V1", "r", "x1_boundary", "x2_boundary", "x1_total", "x2_total"},
                {&tr.t, &tr.eta1, &tr.eta2, &tr.u, &tr.V1, &tr.r, &tr.x1_boundary, &tr.x2_boundary, &tr.x1_total,
                 &tr.x2_total});
}

void write_eta_trajectory_csv(const std::string& path, const EtaTrajectory& tr) {
  write_csv_columns(path, {"t", "eta1", "eta2", "u", "V1", "r"}, {&tr.t, &tr.eta1, &tr.eta2, &tr.u, &tr.V1, &tr.r});
}

}  // namespace lsctl
