#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "lsctl/random.hpp"

namespace lsctl {

using json = nlohmann::json;

/// Uniform grid over [0, A] including both endpoints.
struct AgeGrid {
  double max_age = 1.0;
  std::size_t n_points = 201;

  AgeGrid() = default;
  AgeGrid(double max_age, std::size_t n_points);

  double spacing() const { return max_age / static_cast<double>(n_points - 1); }
  double node(std::size_t i) const {
    return i + 1 == n_points ? max_age : static_cast<double>(i) * spacing();
  }
  bool operator==(const AgeGrid& o) const = default;
};

/// Nonnegative function of age sampled on an AgeGrid. Immutable.
class AgeProfile {
 public:
  AgeProfile() = default;
  /// Negative values within roundoff of zero are clamped (see clamped_negative_count);
  /// anything more negative, or non-finite, is a DomainError.
  AgeProfile(const AgeGrid& grid, std::vector<double> values);

  static AgeProfile constant(const AgeGrid& grid, double value);
  static AgeProfile from_function(const AgeGrid& grid, const std::function<double(double)>& f);
  /// Ages a_i = node(i) as a profile.
  static AgeProfile ages(const AgeGrid& grid);

  const AgeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  /// Linear interpolation between nodes; ages outside [0, A] are clamped.
  double at_age(double a) const;
  double sup_norm() const;
  /// max_i |f(a_{i+1}) - f(a_i)| / h, the discrete stand-in for the Lipschitz seminorm.
  double lipschitz_seminorm() const;

  AgeProfile scaled(double s) const;

 private:
  AgeGrid grid_{};
  std::vector<double> values_;
};

/// Number of grid values clamped from small negatives to zero since process start.
std::size_t clamped_negative_count();

void require_same_grid(const AgeProfile& a, const AgeProfile& b, const char* what);

/// Composite trapezoid rule on samples with spacing h.
double trapezoid(std::span<const double> f, double h);
double integrate(const AgeProfile& f);
/// Trapezoid integral of the pointwise product, the inner product <f, g>.
double inner(const AgeProfile& f, const AgeProfile& g);
/// a -> int_0^a f, by cumulative trapezoid; output[0] = 0.
AgeProfile cumulative_integral(const AgeProfile& f);
/// Pi(a) = exp(-int_0^a mu).
AgeProfile survival(const AgeProfile& mu);
double net_reproduction_number(const AgeProfile& k, const AgeProfile& mu);
AgeProfile resample(const AgeProfile& f, const AgeGrid& target);

/// Parameters of the fertility, mortality and interaction families.
struct FamilyParams {
  double k_base = 0.6, k_amp = 2.5, k_center = 0.23, k_sigma = 0.14;
  double mu_base = 0.065, mu_juv_amp = 0.12, mu_juv = 4.5, mu_sen_amp = 0.1, mu_sen = 2.3;
  double g_base = 0.09, g_amp = 0.35, g_center = 0.5, g_sigma = 0.18;

  /// Independent uniform draws from the dataset ranges.
  static FamilyParams sample(Rng& rng);
  bool within_sampling_ranges() const;
  json to_json() const;
  static FamilyParams from_json(const json& j);
};

struct FamilySample {
  AgeProfile k, mu, g;
};

/// k = k_base + k_amp exp(-(a-c)^2/(2 s^2)), mu = mu_base + juv e^{-r a} + sen a^p, g like k.
FamilySample sample_family(const FamilyParams& p, const AgeGrid& grid);

/// Envelope class for the Lipschitz theorem: ordered bounds plus the H_G budget.
struct ClassBounds {
  AgeProfile k_min, k_max, mu_min, mu_max;
  double lipschitz_budget = 100.0;

  /// Checks ordering and int k_min exp(-int mu_max) > 1; throws DomainError.
  void validate() const;
  /// Membership of (k, mu) in S: pointwise ordering plus the H_G proxy for both.
  bool contains(const AgeProfile& k, const AgeProfile& mu) const;
  /// Clip profiles pointwise into the bounds.
  AgeProfile clip_k(const AgeProfile& k) const;
  AgeProfile clip_mu(const AgeProfile& mu) const;

  /// Bounds wide enough to host most family draws after clipping.
  static ClassBounds family_envelope(const AgeGrid& grid);
};

json profile_to_json(const AgeProfile& f);
AgeProfile profile_from_json(const json& j);

}  // namespace lsctl
