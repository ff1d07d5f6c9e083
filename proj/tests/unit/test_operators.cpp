#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "lsctl/errors.hpp"
#include "lsctl/operators.hpp"

using namespace lsctl;
using lsctl::test::kLn2;

namespace {

AgeProfile constant(const AgeGrid& g, double v) { return AgeProfile::constant(g, v); }

// Independent root: plain bisection on F computed with hand-written quadrature on a finer grid.
double bisection_oracle(const FamilyParams& p, std::size_t n) {
  const AgeGrid g(1.0, n);
  const FamilySample s = sample_family(p, g);
  const double h = g.spacing();
  std::vector<double> cum(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) cum[j] = cum[j - 1] + 0.5 * h * (s.mu[j - 1] + s.mu[j]);
  auto F = [&](double z) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      acc += w * s.k[j] * std::exp(-z * g.node(j) - cum[j]);
    }
    return acc * h - 1.0;
  };
  double lo = 0.0, hi = 50.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("ls_integral") {
  const AgeGrid g = test::ln2_grid();
  const AgeProfile k = constant(g, 2.0), mu = constant(g, 0.0);
  CHECK(std::abs(ls_integral(k, mu, 1.0) - 2.0 * (1.0 - std::exp(-kLn2)) / 1.0) <= 1e-6);
  CHECK(ls_integral(k, mu, 0.0) == doctest::Approx(net_reproduction_number(k, mu)).epsilon(1e-14));

  const AgeGrid g1(1.0, 201);
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng = Rng::stream(21, i);
    const FamilySample s = sample_family(FamilyParams::sample(rng), g1);
    const double z1 = rng.uniform(0.0, 3.0), z2 = z1 + rng.uniform(0.01, 2.0);
    CHECK(ls_integral(s.k, s.mu, z1) > ls_integral(s.k, s.mu, z2));
  }
}

TEST_CASE("zeta bounds in the constant case") {
  const AgeGrid g = test::ln2_grid();
  const ZetaBounds b = zeta_bounds(constant(g, 2.0), constant(g, 0.0));
  CHECK(b.lower == doctest::Approx(std::log(2.0 * kLn2) / kLn2).epsilon(1e-6));
  CHECK(b.upper == doctest::Approx(4.0 * std::log(4.0 * kLn2)).epsilon(1e-9));
  CHECK(b.lower <= 1.0);
  CHECK(b.upper >= 1.0);
  CHECK(b.lower == doctest::Approx(0.4712).epsilon(1e-4));
  CHECK(b.upper == doctest::Approx(4.078).epsilon(1e-3));
}

TEST_CASE("R0 <= 1 is outside the domain") {
  const AgeGrid g(1.0, 101);
  const AgeProfile k = constant(g, 0.9), mu = constant(g, 0.0);
  CHECK(net_reproduction_number(k, mu) == doctest::Approx(0.9));
  CHECK_THROWS_AS(zeta_bounds(k, mu), DomainError);
  CHECK_THROWS_AS(g_ls(k, mu), DomainError);
  try {
    g_ls(k, mu);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("not in set B") != std::string::npos);
  }
}

TEST_CASE("g_ls: constant case") {
  const AgeGrid g = test::ln2_grid(60001);
  const LSRoot r = g_ls(constant(g, 2.0), constant(g, 0.0));
  CHECK(std::abs(r.zeta - 1.0) <= 1e-10);
  CHECK(r.residual <= 1e-12);
  CHECK(r.lower_bound <= r.zeta);
  CHECK(r.zeta <= r.upper_bound);
}

TEST_CASE("g_ls: family draws against a finer-grid bisection oracle") {
  for (std::uint64_t i = 0; i < 12; ++i) {
    Rng rng = Rng::stream(33, i);
    const FamilyParams p = FamilyParams::sample(rng);
    const FamilySample s = sample_family(p, AgeGrid(1.0, 2001));
    if (net_reproduction_number(s.k, s.mu) <= 1.0) continue;
    const LSRoot r = g_ls(s.k, s.mu);
    CHECK(r.residual <= 1e-12);
    CHECK(std::abs(ls_integral(s.k, s.mu, r.zeta) - 1.0) <= 1e-12);
    CHECK(r.zeta >= r.lower_bound);
    CHECK(r.zeta <= r.upper_bound);
    CHECK(std::abs(r.zeta - bisection_oracle(p, 20001)) <= 1e-6);
  }
}

TEST_CASE("g_ls: envelope roots are ordered") {
  const ClassBounds b = ClassBounds::family_envelope(AgeGrid(1.0, 201));
  CHECK(g_ls(b.k_min, b.mu_max).zeta <= g_ls(b.k_max, b.mu_min).zeta);
}

TEST_CASE("kappa, gamma and pi0 closed forms") {
  const AgeGrid g = test::ln2_grid(4001);
  const AgeProfile k = constant(g, 2.0), mu = constant(g, 0.0);
  CHECK(std::abs(g_kappa(k, mu, 1.0) - (1.0 - kLn2)) <= 1e-6);
  CHECK(g_kappa(constant(g, 0.0), mu, 1.0) == 0.0);
  CHECK(std::abs(g_gamma(constant(g, 1.0), 1.0, mu) - 0.5) <= 1e-6);
  CHECK(g_gamma(constant(g, 0.0), 1.0, mu) == 0.0);

  const AgeProfile pi = g_pi(k, mu, 1.0);
  for (std::size_t j = 0; j < g.n_points; j += 100) {
    CHECK(std::abs(pi[j] - (2.0 - std::exp(g.node(j)))) <= 1e-6);
  }
  CHECK(std::abs(pi.front() - 1.0) <= 1e-6);
  CHECK(pi.back() == 0.0);
}

TEST_CASE("kappa is -F'(zeta) and pi0(0) = 1 at the root") {
  const AgeGrid g(1.0, 201);
  for (std::uint64_t i = 0; i < 30; ++i) {
    const FamilySample s = test::family_draw(44, i, g);
    if (net_reproduction_number(s.k, s.mu) <= 1.0) continue;
    const double z = g_ls(s.k, s.mu).zeta;
    const double kappa = g_kappa(s.k, s.mu, z);
    for (double h : {1e-4, 1e-5, 1e-6}) {
      const double fd = -(ls_integral(s.k, s.mu, z + h) - ls_integral(s.k, s.mu, z - h)) / (2.0 * h);
      CHECK(std::abs(fd - kappa) <= 1e-6);
    }
    const AgeProfile pi = g_pi(s.k, s.mu, z);
    CHECK(std::abs(pi.front() - 1.0) <= 1e-8);
    CHECK(pi.back() == 0.0);
  }
}

TEST_CASE("sensitivity constants") {
  const LipschitzBounds lb = zeta_sensitivity_bounds(kLn2, 2.0, 1.0, 1.0);
  CHECK(lb.L_gamma == doctest::Approx(2.0 * kLn2).epsilon(1e-14));
  CHECK(lb.L_kappa == doctest::Approx(kLn2 * kLn2 * 2.0 * 2.0).epsilon(1e-14));
  CHECK(lb.L_pi == doctest::Approx(0.5 * kLn2 * kLn2 * 2.0 * 2.0).epsilon(1e-14));

  // the constants bound the actual variation in zeta
  const AgeGrid g(1.0, 201);
  const FamilySample s = test::family_draw(1, 2, g);
  const double z = g_ls(s.k, s.mu).zeta;
  const LipschitzBounds c = zeta_sensitivity_bounds(1.0, s.k.sup_norm(), s.g.sup_norm(), z + 0.5);
  for (double dz : {0.5, 0.1, 0.01}) {
    const double z2 = z - dz;
    CHECK(std::abs(g_gamma(s.g, z, s.mu) - g_gamma(s.g, z2, s.mu)) <= c.L_gamma * dz);
    CHECK(std::abs(g_kappa(s.k, s.mu, z) - g_kappa(s.k, s.mu, z2)) <= c.L_kappa * dz);
    const AgeProfile p1 = g_pi(s.k, s.mu, z), p2 = g_pi(s.k, s.mu, z2);
    double sup = 0.0;
    for (std::size_t j = 0; j < p1.size(); ++j) sup = std::max(sup, std::abs(p1[j] - p2[j]));
    CHECK(sup <= c.L_pi * dz);
  }
}

TEST_CASE("theorem constant L in the constant case") {
  const AgeGrid g = test::ln2_grid(4001);
  ClassBounds b{constant(g, 2.0), constant(g, 2.0), constant(g, 0.0), constant(g, 0.0)};
  const LipschitzBounds lb = theorem1_L(b);
  const double A = kLn2, K = 2.0;
  const double int_akI = 2.0 * kLn2 * kLn2 / 2.0, int_kI = 2.0 * kLn2;
  const double L = A * std::pow(2.0 * A * K, 2.0 * A * K - 1.0) / (int_akI * std::log(int_kI));
  CHECK(lb.L == doctest::Approx(L).epsilon(1e-6));
  CHECK(lb.zeta_min == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::isfinite(lb.L_gamma));
  CHECK(lb.L_gamma > 0.0);
}

TEST_CASE("theorem constant L needs int k_min I > 1") {
  const AgeGrid g(1.0, 5);
  ClassBounds b{constant(g, 1.0), constant(g, 1.0), constant(g, 0.0), constant(g, 0.0)};
  CHECK(integrate(b.k_min) == 1.0);
  CHECK_THROWS_AS(theorem1_L(b), DomainError);
}

TEST_CASE("lipschitz ratio and audit") {
  const AgeGrid g(1.0, 201);
  const ClassBounds b = ClassBounds::family_envelope(g);
  const LipschitzBounds L = theorem1_L(b);
  const FamilySample s = test::family_draw(3, 0, g);
  const AgeProfile k = b.clip_k(s.k), mu = b.clip_mu(s.mu);
  CHECK(lipschitz_ratio(b, L, k, mu, k, mu) == 0.0);
  CHECK_THROWS_AS(lipschitz_ratio(b, L, k, mu, b.k_max.scaled(2.0), mu), DomainError);

  const LipschitzAuditReport rep = lipschitz_audit(b, 60, 9, 20, 2);
  CHECK(rep.n_evaluated + rep.n_skipped == 60);
  CHECK(rep.n_evaluated > 0);
  CHECK(rep.max_ratio <= 1.0);
  CHECK(rep.monotonicity_violations == 0);
  // the report does not depend on the worker count
  CHECK(lipschitz_audit(b, 60, 9, 20, 1).to_json() == rep.to_json());
}
