#pragma once

#include <cstdint>

#include "lsctl/profiles.hpp"

namespace lsctl {

inline constexpr double kDefaultLsTolerance = 1e-12;
inline constexpr int kDefaultLsMaxIterations = 200;

struct LSRoot {
  double zeta = 0.0;
  double residual = 0.0;  ///< |F(zeta) - 1|
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  int iterations = 0;
};

struct ZetaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct LipschitzBounds {
  double L = 0.0;        ///< constant of the Lipschitz theorem for (k, mu) -> zeta
  double L_gamma = 0.0;  ///< |d gamma / d zeta| bound
  double L_kappa = 0.0;
  double L_pi = 0.0;     ///< sup-norm bound on d pi0 / d zeta
  double zeta_min = 0.0;
  double zeta_max = 0.0;
};

/// n(a) = exp(-zeta a - int_0^a mu).
AgeProfile discount_profile(const AgeProfile& mu, double zeta);

/// F(zeta) = int k exp(-zeta a - int mu).
double ls_integral(const AgeProfile& k, const AgeProfile& mu, double zeta);

/// Bracket (1/A) ln R0 <= zeta <= 2|k| ln(2 A |k|). DomainError when R0 <= 1.
ZetaBounds zeta_bounds(const AgeProfile& k, const AgeProfile& mu);

/// Root of F(zeta) = 1 by Newton steps zeta += (F - 1)/kappa, bisecting whenever a step
/// would leave the bracket.
LSRoot g_ls(const AgeProfile& k, const AgeProfile& mu, double tol = kDefaultLsTolerance,
            int max_iterations = kDefaultLsMaxIterations);

/// kappa = int a k n = -F'(zeta).
double g_kappa(const AgeProfile& k, const AgeProfile& mu, double zeta);
/// gamma = int g n.
double g_gamma(const AgeProfile& g, double zeta, const AgeProfile& mu);
/// pi0(a) = int_a^A k(s) exp(-int_a^s (zeta + mu)) ds, via the tail integral of k n over n(a).
AgeProfile g_pi(const AgeProfile& k, const AgeProfile& mu, double zeta);

/// Sensitivity constants of gamma, kappa and pi0 in zeta, valid for zeta <= zeta_max.
LipschitzBounds zeta_sensitivity_bounds(double max_age, double k_sup, double g_sup, double zeta_max);

/// Theorem constant L plus the zeta-sensitivity constants; zeta_max defaults to the upper
/// bracket of (k_max, mu_min). DomainError when int k_min exp(-int mu_max) <= 1.
LipschitzBounds theorem1_L(const ClassBounds& bounds, double g_sup = 1.0);

/// |zeta~ - zeta| / (L |dk| + L |k_max| A |dmu|); 0 when both differences vanish.
/// DomainError when either pair is outside S.
double lipschitz_ratio(const ClassBounds& bounds, const LipschitzBounds& L, const AgeProfile& k,
                       const AgeProfile& mu, const AgeProfile& k2, const AgeProfile& mu2);

struct LipschitzAuditReport {
  std::size_t n_pairs = 0;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;  ///< identical pairs
  double max_ratio = 0.0;
  std::size_t n_ordered = 0;  ///< ordered pairs used for the monotonicity check
  std::size_t monotonicity_violations = 0;
  LipschitzBounds constants;
  json to_json() const;
};

/// Draws family samples clipped into the bounds, one RNG stream per pair.
LipschitzAuditReport lipschitz_audit(const ClassBounds& bounds, std::size_t n_pairs, std::uint64_t seed,
                                     std::size_t n_ordered = 100, unsigned jobs = 1);

}  // namespace lsctl
