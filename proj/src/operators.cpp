#include "lsctl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lsctl/errors.hpp"
#include "lsctl/parallel.hpp"

namespace lsctl {

namespace {

/// Net maternity f = k Pi with the quadrature weights folded in, so that
/// F(zeta) = sum_j wf_j exp(-zeta a_j).
struct Maternity {
  std::vector<double> wf;
  std::vector<double> ages;
  double max_age;

  Maternity(const AgeProfile& k, const AgeProfile& mu) : max_age(k.grid().max_age) {
    require_same_grid(k, mu, "Lotka-Sharpe integral");
    const AgeProfile pi = survival(mu);
    const double h = k.grid().spacing();
    const std::size_t n = k.size();
    wf.resize(n);
    ages.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = (j == 0 || j + 1 == n) ? 0.5 * h : h;
      wf[j] = w * k[j] * pi[j];
      ages[j] = k.grid().node(j);
    }
  }

  double r0() const {
    double s = 0.0;
    for (double v : wf) s += v;
    return s;
  }

  /// F(zeta) and kappa(zeta) = -F'(zeta) in one sweep.
  void evaluate(double zeta, double& F, double& kappa) const {
    F = 0.0;
    kappa = 0.0;
    for (std::size_t j = 0; j < wf.size(); ++j) {
      const double t = wf[j] * std::exp(-zeta * ages[j]);
      F += t;
      kappa += ages[j] * t;
    }
  }

  double F(double zeta) const {
    double f, kap;
    evaluate(zeta, f, kap);
    return f;
  }
};

ZetaBounds bracket(const Maternity& m, const AgeProfile& k) {
  const double r0 = m.r0();
  if (!(r0 > 1.0)) {
    throw DomainError("not in set B: R0 = " + std::to_string(r0) + " <= 1, the Lotka-Sharpe condition has no positive root");
  }
  const double ks = k.sup_norm();
  return {std::log(r0) / m.max_age, 2.0 * ks * std::log(2.0 * m.max_age * ks)};
}

}  // namespace

AgeProfile discount_profile(const AgeProfile& mu, double zeta) {
  const AgeProfile m = cumulative_integral(mu);
  std::vector<double> v(m.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::exp(-zeta * mu.grid().node(j) - m[j]);
  return AgeProfile(mu.grid(), std::move(v));
}

double ls_integral(const AgeProfile& k, const AgeProfile& mu, double zeta) {
  return Maternity(k, mu).F(zeta);
}

ZetaBounds zeta_bounds(const AgeProfile& k, const AgeProfile& mu) {
  return bracket(Maternity(k, mu), k);
}

LSRoot g_ls(const AgeProfile& k, const AgeProfile& mu, double tol, int max_iterations) {
  if (!(tol > 0.0)) throw DomainError("g_ls: tolerance must be positive");
  const Maternity m(k, mu);
  const ZetaBounds b = bracket(m, k);
  LSRoot out;
  out.lower_bound = b.lower;
  out.upper_bound = b.upper;

  double lo = b.lower, hi = b.upper;
  // F is convex and decreasing, so Newton from the left end climbs monotonically to the
  // root; the bracket only matters when roundoff pushes an iterate past it.
  while (m.F(hi) > 1.0) hi *= 2.0;
  double zeta = lo;
  for (int it = 1; it <= max_iterations; ++it) {
    double F, kappa;
    m.evaluate(zeta, F, kappa);
    const double res = F - 1.0;
    out.iterations = it;
    if (std::abs(res) <= tol) {
      out.zeta = zeta;
      out.residual = std::abs(res);
      return out;
    }
    if (res > 0.0) lo = std::max(lo, zeta);
    else hi = std::min(hi, zeta);
    double next = kappa > 0.0 ? zeta + res / kappa : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == zeta || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      // Bracket exhausted at machine precision: report the better end.
      const double flo = std::abs(m.F(lo) - 1.0), fhi = std::abs(m.F(hi) - 1.0);
      out.zeta = flo <= fhi ? lo : hi;
      out.residual = std::min(flo, fhi);
      if (out.residual <= tol) return out;
      throw ConvergenceError("g_ls: bracket collapsed with residual " + std::to_string(out.residual));
    }
    zeta = next;
  }
  throw ConvergenceError("g_ls: no convergence within " + std::to_string(max_iterations) + " iterations");
}

double g_kappa(const AgeProfile& k, const AgeProfile& mu, double zeta) {
  double F, kappa;
  Maternity(k, mu).evaluate(zeta, F, kappa);
  return kappa;
}

double g_gamma(const AgeProfile& g, double zeta, const AgeProfile& mu) {
  require_same_grid(g, mu, "g_gamma");
  return inner(g, discount_profile(mu, zeta));
}

AgeProfile g_pi(const AgeProfile& k, const AgeProfile& mu, double zeta) {
  require_same_grid(k, mu, "g_pi");
  const AgeProfile n = discount_profile(mu, zeta);
  const double h = k.grid().spacing();
  const std::size_t N = k.size();
  std::vector<double> pi(N, 0.0);
  double tail = 0.0;
  for (std::size_t j = N - 1; j-- > 0;) {
    tail += 0.5 * h * (k[j] * n[j] + k[j + 1] * n[j + 1]);
    pi[j] = tail / n[j];
  }
  return AgeProfile(k.grid(), std::move(pi));
}

LipschitzBounds zeta_sensitivity_bounds(double A, double k_sup, double g_sup, double zeta_max) {
  LipschitzBounds L;
  const double e = std::exp(zeta_max * A);
  L.L_gamma = A * g_sup * e;
  L.L_kappa = A * A * k_sup * e;
  L.L_pi = 0.5 * A * A * k_sup * e;
  L.zeta_max = zeta_max;
  return L;
}

LipschitzBounds theorem1_L(const ClassBounds& bounds, double g_sup) {
  const double A = bounds.k_min.grid().max_age;
  const AgeProfile I = survival(bounds.mu_max);
  const double int_kI = inner(bounds.k_min, I);
  if (!(int_kI > 1.0)) throw DomainError("theorem1_L: int k_min I <= 1, logarithm not positive");
  double int_akI = 0.0;
  {
    std::vector<double> akI(I.size());
    for (std::size_t j = 0; j < akI.size(); ++j) akI[j] = I.grid().node(j) * bounds.k_min[j] * I[j];
    int_akI = trapezoid(akI, I.grid().spacing());
  }
  const double K = bounds.k_max.sup_norm();
  const double zeta_max = zeta_bounds(bounds.k_max, bounds.mu_min).upper;
  LipschitzBounds out = zeta_sensitivity_bounds(A, K, g_sup, zeta_max);
  out.L = A * std::pow(2.0 * A * K, 2.0 * A * K - 1.0) / (int_akI * std::log(int_kI));
  out.zeta_min = g_ls(bounds.k_min, bounds.mu_max).zeta;
  return out;
}

double lipschitz_ratio(const ClassBounds& bounds, const LipschitzBounds& L, const AgeProfile& k,
                       const AgeProfile& mu, const AgeProfile& k2, const AgeProfile& mu2) {
  if (!bounds.contains(k, mu) || !bounds.contains(k2, mu2)) {
    throw DomainError("lipschitz_ratio: pair outside the class S");
  }
  double dk = 0.0, dmu = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    dk = std::max(dk, std::abs(k2[j] - k[j]));
    dmu = std::max(dmu, std::abs(mu2[j] - mu[j]));
  }
  if (dk == 0.0 && dmu == 0.0) return 0.0;
  const double z1 = g_ls(k, mu).zeta;
  const double z2 = g_ls(k2, mu2).zeta;
  const double bound = L.L * dk + L.L * bounds.k_max.sup_norm() * k.grid().max_age * dmu;
  return std::abs(z2 - z1) / bound;
}

json LipschitzAuditReport::to_json() const {
  return json{{"n_pairs", n_pairs},
              {"n_evaluated", n_evaluated},
              {"n_skipped", n_skipped},
              {"max_ratio", max_ratio},
              {"n_ordered", n_ordered},
              {"monotonicity_violations", monotonicity_violations},
              {"L", constants.L},
              {"L_gamma", constants.L_gamma},
              {"L_kappa", constants.L_kappa},
              {"L_pi", constants.L_pi},
              {"zeta_min", constants.zeta_min},
              {"zeta_max", constants.zeta_max}};
}

namespace {

struct ClippedDraw {
  AgeProfile k, mu;
};

ClippedDraw clipped_draw(const ClassBounds& bounds, Rng& rng) {
  const FamilySample s = sample_family(FamilyParams::sample(rng), bounds.k_min.grid());
  return {bounds.clip_k(s.k), bounds.clip_mu(s.mu)};
}

}  // namespace

LipschitzAuditReport lipschitz_audit(const ClassBounds& bounds, std::size_t n_pairs, std::uint64_t seed,
                                     std::size_t n_ordered, unsigned jobs) {
  if (n_pairs < 1) throw DomainError("lipschitz_audit: need at least one pair");
  bounds.validate();
  LipschitzAuditReport rep;
  rep.constants = theorem1_L(bounds);
  rep.n_pairs = n_pairs;
  rep.n_ordered = n_ordered;

  // NaN marks a skipped (identical or non-member) pair.
  std::vector<double> ratios(n_pairs);
  parallel_for(n_pairs, jobs, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const ClippedDraw p = clipped_draw(bounds, rng);
    const ClippedDraw q = clipped_draw(bounds, rng);
    if (!bounds.contains(p.k, p.mu) || !bounds.contains(q.k, q.mu)) {
      ratios[i] = std::nan("");
      return;
    }
    const double r = lipschitz_ratio(bounds, rep.constants, p.k, p.mu, q.k, q.mu);
    ratios[i] = (r == 0.0) ? std::nan("") : r;
  });
  for (double r : ratios) {
    if (std::isnan(r)) {
      ++rep.n_skipped;
    } else {
      ++rep.n_evaluated;
      rep.max_ratio = std::max(rep.max_ratio, r);
    }
  }

  std::vector<char> violated(n_ordered, 0);
  parallel_for(n_ordered, jobs, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, n_pairs + i);
    const ClippedDraw p = clipped_draw(bounds, rng);
    const double grow = rng.uniform(0.0, 0.5), shrink = rng.uniform(0.0, 0.5);
    const AgeProfile k2 = bounds.clip_k(p.k.scaled(1.0 + grow));
    const AgeProfile mu2 = bounds.clip_mu(p.mu.scaled(1.0 - shrink));
    const double z = g_ls(p.k, p.mu).zeta;
    const double z2 = g_ls(k2, mu2).zeta;
    violated[i] = z2 < z - 1e-12;
  });
  for (char v : violated) rep.monotonicity_violations += v;
  return rep;
}

}  // namespace lsctl
