#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "lsctl/errors.hpp"

using namespace lsctl;
using lsctl::test::kLn2;

TEST_CASE("integrate: zero, constant and linear") {
  CHECK(integrate(AgeProfile::constant(AgeGrid(3.0, 17), 0.0)) == 0.0);
  CHECK(integrate(AgeProfile::constant(AgeGrid(2.0, 11), 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
  const AgeGrid g(1.0, 1001);
  CHECK(std::abs(integrate(AgeProfile::ages(g)) - 0.5) <= 1e-9);
}

TEST_CASE("integrate: halving the spacing cuts the error on a^2 by about four") {
  auto err = [](std::size_t n) {
    const AgeGrid g(1.0, n);
    return std::abs(integrate(AgeProfile::from_function(g, [](double a) { return a * a; })) - 1.0 / 3.0);
  };
  for (std::size_t n : {11, 21, 41, 81}) CHECK(err(n) / err(2 * n - 1) >= 3.9);
}

TEST_CASE("cumulative integral") {
  const AgeGrid g(1.0, 1001);
  const AgeProfile zero = cumulative_integral(AgeProfile::constant(g, 0.0));
  for (double v : zero.values()) CHECK(v == 0.0);
  const AgeProfile lin = cumulative_integral(AgeProfile::constant(g, 1.0));
  for (std::size_t i = 0; i < g.n_points; ++i) CHECK(std::abs(lin[i] - g.node(i)) <= 1e-10);
  CHECK(std::abs(cumulative_integral(AgeProfile::ages(g)).back() - 0.5) <= 1e-8);
  // last node agrees with the plain trapezoid
  Rng rng(3);
  const AgeProfile f = test::smooth_profile(rng, g, 0.1, 2.0);
  CHECK(cumulative_integral(f).back() == doctest::Approx(integrate(f)).epsilon(1e-13));
}

TEST_CASE("survival") {
  const AgeGrid g(kLn2, 401);
  for (double v : survival(AgeProfile::constant(g, 0.0)).values()) CHECK(v == 1.0);
  CHECK(std::abs(survival(AgeProfile::constant(g, 1.0)).back() - 0.5) <= 1e-9);

  const AgeGrid g1(1.0, 201);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const FamilySample s = test::family_draw(11, i, g1);
    const AgeProfile pi = survival(s.mu);
    const AgeProfile cm = cumulative_integral(s.mu);
    for (std::size_t j = 0; j < pi.size(); ++j) {
      CHECK(pi[j] == doctest::Approx(std::exp(-cm[j])).epsilon(1e-14));
      if (j > 0) CHECK(pi[j] <= pi[j - 1]);
    }
  }
}

TEST_CASE("family profiles") {
  const AgeGrid g(1.0, 201);  // node 50 sits at 0.25
  FamilyParams p;
  p.k_center = 0.25;
  FamilySample s = sample_family(p, g);
  CHECK(std::abs(s.k[50] - (p.k_base + p.k_amp)) <= 1e-12);

  p.k_amp = 0.0;
  p.mu_juv_amp = 0.0;
  p.mu_sen_amp = 0.0;
  s = sample_family(p, g);
  for (std::size_t j = 0; j < g.n_points; ++j) {
    CHECK(s.k[j] == p.k_base);
    CHECK(s.mu[j] == p.mu_base);
  }
}

TEST_CASE("family parameter draws stay in range and round-trip through JSON") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = Rng::stream(5, i);
    const FamilyParams p = FamilyParams::sample(rng);
    CHECK(p.within_sampling_ranges());
    const FamilyParams q = FamilyParams::from_json(p.to_json());
    CHECK(q.to_json() == p.to_json());
  }
  FamilyParams bad;
  bad.k_amp = 7.0;
  CHECK_FALSE(bad.within_sampling_ranges());
  CHECK_THROWS_AS(FamilyParams::from_json(json{{"k_base", 0.5}}), ShapeError);
}

TEST_CASE("net reproduction number") {
  const AgeGrid g = test::ln2_grid();
  CHECK(std::abs(net_reproduction_number(AgeProfile::constant(g, 2.0), AgeProfile::constant(g, 0.0)) -
                 2.0 * kLn2) <= 1e-6);
  CHECK(net_reproduction_number(AgeProfile::constant(g, 0.0), AgeProfile::constant(g, 0.3)) == 0.0);
}

TEST_CASE("profile construction rejects bad input") {
  const AgeGrid g(1.0, 5);
  CHECK_THROWS_AS(AgeGrid(0.0, 5), DomainError);
  CHECK_THROWS_AS(AgeGrid(1.0, 2), DomainError);
  CHECK_THROWS_AS(AgeProfile(g, {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(AgeProfile(g, {1, 2, NAN, 4, 5}), DomainError);
  CHECK_THROWS_AS(AgeProfile(g, {1, 2, -0.5, 4, 5}), DomainError);

  const std::size_t before = clamped_negative_count();
  const AgeProfile p(g, {1, 2, -1e-14, 4, 5});
  CHECK(p[2] == 0.0);
  CHECK(clamped_negative_count() == before + 1);

  CHECK_THROWS_AS(inner(p, AgeProfile::constant(AgeGrid(1.0, 7), 1.0)), ShapeError);
}

TEST_CASE("interpolation, resampling and JSON") {
  const AgeGrid g(2.0, 21);
  const AgeProfile f = AgeProfile::from_function(g, [](double a) { return 3.0 * a + 1.0; });
  CHECK(f.at_age(0.55) == doctest::Approx(2.65).epsilon(1e-14));
  CHECK(f.at_age(-1.0) == 1.0);
  CHECK(f.at_age(9.0) == 7.0);
  CHECK(f.lipschitz_seminorm() == doctest::Approx(3.0).epsilon(1e-12));

  // linear data survives resampling exactly
  const AgeProfile r = resample(f, AgeGrid(2.0, 57));
  for (std::size_t j = 0; j < r.size(); ++j) CHECK(r[j] == doctest::Approx(3.0 * r.grid().node(j) + 1.0));

  const AgeProfile back = profile_from_json(profile_to_json(f));
  CHECK(back.grid() == f.grid());
  for (std::size_t j = 0; j < f.size(); ++j) CHECK(back[j] == f[j]);
  CHECK_THROWS_AS(profile_from_json(json{{"values", {1, 2}}}), ShapeError);
}

TEST_CASE("class bounds") {
  const AgeGrid g(1.0, 101);
  const ClassBounds b = ClassBounds::family_envelope(g);
  CHECK_NOTHROW(b.validate());
  const FamilySample s = test::family_draw(1, 0, g);
  const AgeProfile k = b.clip_k(s.k), mu = b.clip_mu(s.mu);
  for (std::size_t j = 0; j < k.size(); ++j) {
    CHECK(k[j] >= b.k_min[j]);
    CHECK(k[j] <= b.k_max[j]);
    CHECK(mu[j] >= b.mu_min[j]);
    CHECK(mu[j] <= b.mu_max[j]);
  }
  ClassBounds swapped = b;
  std::swap(swapped.k_min, swapped.k_max);
  CHECK_THROWS_AS(swapped.validate(), DomainError);
  CHECK_FALSE(b.contains(AgeProfile::constant(g, 1e3), mu));
}
