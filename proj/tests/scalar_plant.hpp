#pragma once

// Single-species plant for the mortality regression tests.

#include <cmath>
#include <vector>

#include "lsctl/adaptive.hpp"

namespace lsctl::test {

// Single-species upwind plant x_j' = x_{j-1} - h (mu_j + loss) x_j with renewal at age 0.
struct ScalarPlant {
  AgeGrid grid{1.0, 101};
  AgeProfile k = AgeProfile::constant(grid, 2.0);
  double mu0 = 0.3;
  // stable age shape, so the data carry no jump between the initial cohorts and the newborns
  AgeProfile x = initial(grid, k);

  static AgeProfile initial(const AgeGrid& g, const AgeProfile& k) {
    std::vector<double> v = AgeProfile::from_function(g, [](double a) { return std::exp(-1.59 * a); }).vector();
    v[0] = renewal_boundary(k, v);
    return AgeProfile(g, std::move(v));
  }

  double loss(double t) const { return 1.2 + 0.3 * std::sin(t); }

  void step(double l) {
    const double h = grid.spacing();
    std::vector<double> y(grid.n_points);
    for (std::size_t j = 1; j < y.size(); ++j) y[j] = x[j - 1] - h * (mu0 + l) * x[j];
    y[0] = renewal_boundary(k, y);
    x = AgeProfile(grid, std::move(y));
  }
};

// Runs the plant and the mortality regression from mu_hat0 to the horizon.
inline SpeciesEstimator run_regression(ScalarPlant& p, const AgeProfile& mu_hat0, double horizon,
                                       double* innovation_tail = nullptr) {
  SpeciesEstimator est = SpeciesEstimator::start(p.k, mu_hat0, p.x);
  const double h = p.grid.spacing();
  const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
  double worst = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = n * h, l = p.loss(t);
    if (t > 10.0 / est.alpha) {
      const std::vector<double> y = est.regression_target(p.x);
      for (std::size_t j = 1; j < y.size(); ++j) worst = std::max(worst, std::abs(y[j] - est.mu_hat[j] * est.sigma[j]));
    }
    update_mu_hat(est, p.x, transport_residual(p.x, l), h);
    p.step(l);
  }
  if (innovation_tail) *innovation_tail = worst;
  return est;
}

}  // namespace lsctl::test
