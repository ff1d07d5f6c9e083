#include "lsctl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "lsctl/errors.hpp"
#include "lsctl/parallel.hpp"
#include "lsctl/random.hpp"

namespace lsctl {

namespace {

double ray_radius(double c, double cs, double sn, const LyapunovQuantities& lq) {
  auto V = [&](double s) { return lyapunov_v1({s * cs, s * sn}, lq); };
  double lo = 0.0, hi = 1.0;
  while (V(hi) < c) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (V(mid) < c ? lo : hi) = mid;
  }
  return std::abs(V(lo) - c) <= std::abs(V(hi) - c) ? lo : hi;
}

/// u_approx = alpha + gx X + gy Y with X = e^{-eta1}, Y = e^{eta2}.
struct AffineControl {
  double alpha, gx, gy;
  AffineControl(const PerturbationLedger& L, const ControllerConfig& cfg) {
    const double eps = cfg.epsilon;
    alpha = L.zeta2_hat - L.a_hat + cfg.beta * ((1.0 + eps) * (L.zeta2_hat - L.zeta1_hat) - eps * L.a_hat);
    gx = -cfg.beta * L.m1_hat;
    gy = cfg.beta * (1.0 + eps) * L.m2_hat;
  }
};

}  // namespace

std::vector<EtaState> level_set_boundary(double c, const LyapunovQuantities& lq, std::size_t n_rays) {
  if (!(c > 0.0)) throw DomainError("level_set_boundary: c must be positive");
  std::vector<EtaState> pts(n_rays);
  for (std::size_t i = 0; i < n_rays; ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_rays);
    const double cs = std::cos(th), sn = std::sin(th);
    const double s = ray_radius(c, cs, sn, lq);
    pts[i] = {s * cs, s * sn};
  }
  return pts;
}

std::vector<std::pair<double, double>> error_ball_samples(double delta) {
  std::vector<std::pair<double, double>> e{{0.0, 0.0}};
  if (!(delta > 0.0)) return e;
  const double d = delta, h = 0.5 * delta;
  for (auto p : {std::pair{d, 0.0}, {-d, 0.0}, {0.0, d}, {0.0, -d}, {h, h}, {h, -h}, {-h, h}, {-h, -h}}) e.push_back(p);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const double e1 = -d + 2.0 * d * i / 8.0, e2 = -d + 2.0 * d * j / 8.0;
      if (std::abs(e1) + std::abs(e2) <= d * (1.0 + 1e-12) && !(i == 4 && j == 4)) e.emplace_back(e1, e2);
    }
  }
  return e;
}

CertificateProblem::CertificateProblem(double delta, const ControllerConfig& cfg, const EquilibriumScalars& eq,
                                       const SpeciesSpec& prey, const SpeciesSpec& predator, CStarOptions opt)
    : delta_(delta), cfg_(cfg), lq_(LyapunovQuantities::from_equilibrium(eq, cfg)), opt_(opt) {
  if (!(delta >= 0.0)) throw DomainError("certificate: delta must be nonnegative");
  cfg.validate();
  for (auto [e1, e2] : error_ball_samples(delta)) ledgers_.push_back(hatted_quantities(e1, e2, prey, predator, eq));
}

std::vector<EtaState> CertificateProblem::sample_sublevel_set(double c) const {
  std::vector<EtaState> pts = level_set_boundary(c, lq_, opt_.n_rays);
  double xlo = INFINITY, xhi = 0.0, ylo = INFINITY, yhi = 0.0;
  for (const auto& p : pts) {
    const double X = std::exp(-p.eta1), Y = std::exp(p.eta2);
    xlo = std::min(xlo, X);
    xhi = std::max(xhi, X);
    ylo = std::min(ylo, Y);
    yhi = std::max(yhi, Y);
  }
  const std::size_t m = std::max<std::size_t>(2, opt_.interior);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double X = xlo + (xhi - xlo) * i / (m - 1.0), Y = ylo + (yhi - ylo) * j / (m - 1.0);
      const EtaState e{-std::log(X), std::log(Y)};
      if (lyapunov_v1(e, lq_) <= c) pts.push_back(e);
    }
  }
  return pts;
}

bool CertificateProblem::inside_D_star(double c) const {
  return max_r_on_level(c, lq_, opt_.n_rays) < std::min(lq_.a_gain, lq_.b_gain);
}

double CertificateProblem::min_control(double c) const {
  const std::vector<EtaState> pts = sample_sublevel_set(c);
  double m = INFINITY;
  for (const auto& L : ledgers_) {
    const AffineControl u(L, cfg_);
    for (const auto& p : pts) m = std::min(m, u.alpha + u.gx * std::exp(-p.eta1) + u.gy * std::exp(p.eta2));
  }
  return m;
}

double compute_c_star(double delta, const ControllerConfig& cfg, const EquilibriumScalars& eq,
                      const SpeciesSpec& prey, const SpeciesSpec& predator, CStarOptions opt) {
  const CertificateProblem prob(delta, cfg, eq, prey, predator, opt);
  double lo = 1e-9;
  if (!prob.feasible(lo)) {
    throw CertificateError("compute_c_star: even c = 1e-9 is infeasible for delta = " + std::to_string(delta));
  }
  double hi = 2.0 * lo;
  while (prob.feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw CertificateError("compute_c_star: feasibility did not terminate");
  }
  while (hi - lo > opt.rel_tol * lo) {
    const double mid = hi > 2.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    (prob.feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

double max_r_on_level(double c, const LyapunovQuantities& lq, std::size_t n_rays) {
  double m = 0.0;
  for (const auto& p : level_set_boundary(c, lq, n_rays)) m = std::max(m, r_of(p, lq));
  return m;
}

json ConstructiveCR::to_json() const {
  return json{{"C_R", C_R},       {"L_a", L_a},   {"L_m1", L_m1},
              {"L_m2", L_m2},     {"L_gain", L_gain},
              {"gamma2_lower", gamma2_lower}, {"kappa2_lower", kappa2_lower},
              {"pi1_lower", pi1_lower},       {"E1", E1}, {"E2", E2}};
}

ConstructiveCR constructive_C_R(double R, double delta, const SpeciesSpec& prey, const SpeciesSpec& predator,
                                const EquilibriumScalars& eq, const ControllerConfig& cfg) {
  const double A = prey.grid().max_age;
  const double z1 = eq.zeta1, z2 = eq.zeta2;
  const LipschitzBounds s1 = zeta_sensitivity_bounds(A, prey.k.sup_norm(), predator.g.sup_norm(), z1 + delta);
  const LipschitzBounds s2 = zeta_sensitivity_bounds(A, predator.k.sup_norm(), prey.g.sup_norm(), z2 + delta);
  const double Lg2 = s1.L_gamma;  // gamma2 = int g2 n1 moves with zeta1
  const double Lg1 = s2.L_gamma;
  const double Lk1 = s1.L_kappa, Lk2 = s2.L_kappa;

  // gamma, kappa and pi0 all decrease in zeta, so interval extremes sit at the ends.
  const double gamma2_lo = g_gamma(predator.g, z1 + delta, prey.mu);
  const double gamma1_hi = g_gamma(prey.g, z2 - delta, predator.mu);
  const double kappa1_hi = g_kappa(prey.k, prey.mu, z1 - delta);
  const double kappa2_lo = g_kappa(predator.k, predator.mu, z2 + delta);
  const double scale1 = prey.kappa / prey.pi0_n, scale2 = predator.kappa / predator.pi0_n;
  const double p1_lo = scale1 * inner(g_pi(prey.k, prey.mu, z1 + delta), prey.n_profile);
  const double p2_hi = scale2 * inner(g_pi(predator.k, predator.mu, z2 - delta), predator.n_profile);
  const double Lp1 = scale1 * s1.L_pi * A, Lp2 = scale2 * s2.L_pi * A;
  if (!(gamma2_lo > 0.0) || !(kappa2_lo > 0.0) || !(p1_lo > 0.0)) {
    throw DomainError("constructive_C_R: a hatted denominator reaches 0 within the error ball");
  }

  ConstructiveCR out;
  const double x1 = eq.x1_star0, x2 = eq.x2_star0;
  out.gamma2_lower = gamma2_lo;
  out.kappa2_lower = kappa2_lo;
  out.pi1_lower = p1_lo;
  out.L_a = Lg2 / (x1 * gamma2_lo * gamma2_lo);
  out.L_m1 = (Lk1 / (gamma2_lo * p1_lo) + kappa1_hi * Lg2 / (gamma2_lo * gamma2_lo * p1_lo) +
              kappa1_hi * Lp1 / (gamma2_lo * p1_lo * p1_lo)) /
             x1;
  out.L_m2 = x2 * (Lg1 * p2_hi / kappa2_lo + gamma1_hi * Lp2 / kappa2_lo +
                   gamma1_hi * p2_hi * Lk2 / (kappa2_lo * kappa2_lo));
  out.E1 = 1.0 + R / eq.a_gain();
  out.E2 = 1.0 + R / eq.b_gain();
  const double eps = cfg.epsilon;
  out.L_gain = (1.0 + eps) + std::max(eps * out.L_a + out.L_m1 * out.E1, (1.0 + eps) * out.L_m2 * out.E2);
  out.C_R = std::max(1.0, out.L_a) + cfg.beta * out.L_gain;
  return out;
}

double sup_delta_u_on_disc(const PerturbationLedger& L, double R, const LyapunovQuantities& lq,
                           const ControllerConfig& cfg) {
  // Delta_u = c0 + cx X + cy Y with X = 1 - phi1/a, Y = 1 + phi2/b.
  const double eps = cfg.epsilon;
  const double c0 = -L.e2 - (L.a_hat - L.a) + cfg.beta * ((1.0 + eps) * (L.e1 - L.e2) - eps * (L.a_hat - L.a));
  const double cx = -cfg.beta * (L.m1_hat - L.m1);
  const double cy = cfg.beta * (1.0 + eps) * (L.m2_hat - L.m2);
  return std::abs(c0 + cx + cy) + R * std::hypot(cx / lq.a_gain, cy / lq.b_gain);
}

CREstimate empirical_C_R(double R, double delta, const SpeciesSpec& prey, const SpeciesSpec& predator,
                         const EquilibriumScalars& eq, const ControllerConfig& cfg, std::size_t n_samples,
                         std::uint64_t seed) {
  const LyapunovQuantities lq = LyapunovQuantities::from_equilibrium(eq, cfg);
  if (!(R < std::min(lq.a_gain, lq.b_gain))) throw DomainError("empirical_C_R: R must be below min(a, b)");
  std::vector<std::pair<double, double>> es = error_ball_samples(delta);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    // Uniform direction on the l1 sphere, radius uniform in (0, delta].
    const double t = rng.uniform(-1.0, 1.0), rad = delta * (1.0 - rng.uniform());
    const double s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    es.emplace_back(rad * t, s * rad * (1.0 - std::abs(t)));
  }
  CREstimate out;
  for (auto [e1, e2] : es) {
    const double n1 = std::abs(e1) + std::abs(e2);
    if (n1 == 0.0) continue;
    const PerturbationLedger L = hatted_quantities(e1, e2, prey, predator, eq);
    out.empirical = std::max(out.empirical, sup_delta_u_on_disc(L, R, lq, cfg) / n1);
    ++out.n_error_samples;
  }
  out.constructive = constructive_C_R(R, delta, prey, predator, eq, cfg);
  out.consistent = out.empirical <= out.constructive.C_R;
  return out;
}

json RobustnessCertificate::to_json() const {
  return json{{"delta", delta},
              {"c", c},
              {"c_star_delta", c_star_delta},
              {"R_c", R_c},
              {"C_R", C_R},
              {"m_c", m_c},
              {"M_c", M_c},
              {"B1", B1},
              {"B2", B2},
              {"q", q},
              {"q0", q0},
              {"beta_amplitude", beta_amplitude},
              {"beta_decay", beta_decay},
              {"mu_c_delta", mu_c_delta},
              {"majorization_bound", majorization_bound},
              {"majorization_holds", majorization_holds},
              {"lambda_star", lambda_star},
              {"c_eps", c_eps}};
}

RobustnessCertificate certificate_constants(double c, double delta, const LyapunovQuantities& lq, double C_R) {
  if (!(lq.lambda_star > 0.0)) throw CertificateError("certificate: lambda* must be positive");
  RobustnessCertificate rc;
  const double a = lq.a_gain, b = lq.b_gain, e1 = 1.0 + lq.epsilon;
  rc.delta = delta;
  rc.c = c;
  rc.C_R = C_R;
  rc.lambda_star = lq.lambda_star;
  rc.c_eps = lq.c_eps;
  rc.B1 = 1.0 + c / a;
  rc.B2 = 1.0 + c / (e1 * b);
  rc.m_c = 0.5 * std::min(std::exp(-3.0 * rc.B1) / a, e1 * std::exp(-3.0 * rc.B2) / b);
  rc.M_c = 0.5 * std::max(std::exp(3.0 * rc.B1) / a, e1 * std::exp(3.0 * rc.B2) / b);
  rc.beta_amplitude = std::sqrt(rc.M_c / rc.m_c);
  rc.beta_decay = lq.lambda_star / (4.0 * rc.M_c);
  rc.mu_c_delta = lq.c_eps / lq.lambda_star * rc.beta_amplitude * C_R * delta;
  // x1*(0) gamma2 = 1/a and zeta1 - zeta2 = b - a.
  rc.q0 = 1.0 / (1.0 + (b - a) / a);
  rc.q = e1 * rc.q0 * std::exp(-3.0 * (c / a) * (1.0 - rc.q0 / e1));
  rc.majorization_bound = std::exp(3.0 * (rc.B1 + rc.B2)) * (rc.q + 1.0 / rc.q);
  rc.majorization_holds = rc.M_c / rc.m_c <= rc.majorization_bound * (1.0 + 1e-12);
  return rc;
}

std::vector<SweepRow> robustness_sweep(const std::vector<double>& deltas, const SpeciesSpec& prey,
                                       const SpeciesSpec& predator, const EquilibriumSpec& eq,
                                       const ControllerConfig& cfg, const SweepOptions& opt) {
  const LyapunovQuantities lq = LyapunovQuantities::from_equilibrium(eq, cfg);
  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    SweepRow row;
    row.delta = delta;
    row.c_star = compute_c_star(delta, cfg, eq, prey, predator, opt.c_star);
    row.c = opt.c_fraction * row.c_star;
    row.R_c = max_r_on_level(row.c, lq, opt.c_star.n_rays);
    const CREstimate cr = empirical_C_R(row.R_c, delta, prey, predator, eq, cfg);
    row.C_R_empirical = cr.empirical;
    row.C_R_constructive = cr.constructive.C_R;
    row.certificate = certificate_constants(row.c, delta, lq, row.C_R_constructive);
    row.certificate.c_star_delta = row.c_star;
    row.certificate.R_c = row.R_c;
    row.mu_c = row.certificate.mu_c_delta;

    std::vector<PerturbationLedger> corners;
    if (delta > 0.0) {
      corners.push_back(hatted_quantities(0.5 * delta, -0.5 * delta, prey, predator, eq));
      corners.push_back(hatted_quantities(-0.5 * delta, 0.5 * delta, prey, predator, eq));
    } else {
      corners.push_back(hatted_quantities(0.0, 0.0, prey, predator, eq));
    }
    const std::vector<EtaState> ics = level_set_boundary(row.c, lq, opt.n_initial_conditions);
    const std::size_t runs = ics.size() * corners.size();
    struct RunResult {
      double max_v1 = 0.0, tail_r = 0.0;
      std::size_t clamps = 0, violations = 0;
    };
    std::vector<RunResult> res(runs);
    EtaIntegrationOptions io;
    io.horizon = opt.horizon;
    io.dt = opt.dt;
    io.record_every = opt.record_every;
    parallel_for(runs, opt.jobs, [&](std::size_t i) {
      const EtaTrajectory tr = integrate_eta(ics[i % ics.size()], eq, cfg, corners[i / ics.size()], io);
      RunResult& rr = res[i];
      rr.clamps = tr.clamp_events;
      const double r0 = tr.r.front();
      const double t_tail = (1.0 - opt.tail_fraction) * opt.horizon;
      for (std::size_t j = 0; j < tr.t.size(); ++j) {
        rr.max_v1 = std::max(rr.max_v1, tr.V1[j]);
        if (tr.t[j] >= t_tail) rr.tail_r = std::max(rr.tail_r, tr.r[j]);
        if (tr.r[j] > row.certificate.beta_c(r0, tr.t[j]) + row.mu_c) ++rr.violations;
      }
    });
    row.runs = runs;
    for (const auto& rr : res) {
      row.max_V1_excursion = std::max(row.max_V1_excursion, rr.max_v1 / row.c);
      row.tail_r = std::max(row.tail_r, rr.tail_r);
      row.clamp_events += rr.clamps;
      row.envelope_violations += rr.violations;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "delta,c_star,C_R_empirical,C_R_constructive,max_V1_excursion,clamp_events,tail_r,mu_c,c,R_c,"
         "envelope_violations,runs,certified\n";
  for (const auto& r : rows) {
    out << format_double(r.delta) << ',' << format_double(r.c_star) << ',' << format_double(r.C_R_empirical) << ','
        << format_double(r.C_R_constructive) << ',' << format_double(r.max_V1_excursion) << ',' << r.clamp_events
        << ',' << format_double(r.tail_r) << ',' << format_double(r.mu_c) << ',' << format_double(r.c) << ','
        << format_double(r.R_c) << ',' << r.envelope_violations << ',' << r.runs << ','
        << (r.certified() ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lsctl
