#include "lsctl/profiles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "lsctl/errors.hpp"

namespace lsctl {

namespace {

std::atomic<std::size_t> g_clamped{0};

struct Range {
  double lo, hi;
};

// Uniform sampling ranges of the 13 family parameters, in FamilyParams field order.
constexpr Range kRanges[13] = {
    {0.40, 0.80}, {2.0, 3.0},  {0.11, 0.35}, {0.05, 0.23}, {0.03, 0.10}, {0.05, 0.19}, {3.5, 5.5},
    {0.03, 0.17}, {1.7, 2.9},  {0.05, 0.13}, {0.20, 0.50}, {0.37, 0.63}, {0.05, 0.31},
};

constexpr const char* kNames[13] = {"k_base",     "k_amp",  "k_center",   "k_sigma", "mu_base",
                                    "mu_juv_amp", "mu_juv", "mu_sen_amp", "mu_sen",  "g_base",
                                    "g_amp",      "g_center", "g_sigma"};

double* field(FamilyParams& p, int i) {
  double* f[13] = {&p.k_base,     &p.k_amp,  &p.k_center,   &p.k_sigma, &p.mu_base,
                   &p.mu_juv_amp, &p.mu_juv, &p.mu_sen_amp, &p.mu_sen,  &p.g_base,
                   &p.g_amp,      &p.g_center, &p.g_sigma};
  return f[i];
}

double gauss(double a, double c, double s) { return std::exp(-(a - c) * (a - c) / (2.0 * s * s)); }

}  // namespace

AgeGrid::AgeGrid(double max_age_, std::size_t n_points_) : max_age(max_age_), n_points(n_points_) {
  if (!(max_age > 0.0) || !std::isfinite(max_age)) throw DomainError("AgeGrid: max_age must be positive");
  if (n_points < 3) throw DomainError("AgeGrid: need at least 3 points");
}

AgeProfile::AgeProfile(const AgeGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_points) {
    throw ShapeError("AgeProfile: " + std::to_string(values_.size()) + " values for a grid of " +
                     std::to_string(grid_.n_points) + " points");
  }
  double scale = 1.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("AgeProfile: non-finite value");
    scale = std::max(scale, std::abs(v));
  }
  const double tol = 1e-9 * scale;
  for (double& v : values_) {
    if (v < 0.0) {
      if (v < -tol) throw DomainError("AgeProfile: negative value " + std::to_string(v));
      v = 0.0;
      g_clamped.fetch_add(1, std::memory_order_relaxed);
    }
  }
}

AgeProfile AgeProfile::constant(const AgeGrid& grid, double value) {
  return AgeProfile(grid, std::vector<double>(grid.n_points, value));
}

AgeProfile AgeProfile::from_function(const AgeGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_points);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
  return AgeProfile(grid, std::move(v));
}

AgeProfile AgeProfile::ages(const AgeGrid& grid) {
  return from_function(grid, [](double a) { return a; });
}

double AgeProfile::at_age(double a) const {
  const double h = grid_.spacing();
  if (a <= 0.0) return values_.front();
  if (a >= grid_.max_age) return values_.back();
  const double s = a / h;
  auto i = static_cast<std::size_t>(s);
  if (i >= values_.size() - 1) return values_.back();
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double AgeProfile::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double AgeProfile::lipschitz_seminorm() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) m = std::max(m, std::abs(values_[i + 1] - values_[i]));
  return m / grid_.spacing();
}

AgeProfile AgeProfile::scaled(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return AgeProfile(grid_, std::move(v));
}

std::size_t clamped_negative_count() { return g_clamped.load(); }

void require_same_grid(const AgeProfile& a, const AgeProfile& b, const char* what) {
  if (!(a.grid() == b.grid())) throw ShapeError(std::string(what) + ": profiles live on different grids");
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

double integrate(const AgeProfile& f) { return trapezoid(f.values(), f.grid().spacing()); }

double inner(const AgeProfile& f, const AgeProfile& g) {
  require_same_grid(f, g, "inner");
  const std::size_t n = f.size();
  double s = 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i] * g[i];
  return s * f.grid().spacing();
}

AgeProfile cumulative_integral(const AgeProfile& f) {
  const double h = f.grid().spacing();
  std::vector<double> c(f.size(), 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) c[i] = c[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return AgeProfile(f.grid(), std::move(c));
}

AgeProfile survival(const AgeProfile& mu) {
  AgeProfile m = cumulative_integral(mu);
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-m[i]);
  return AgeProfile(mu.grid(), std::move(v));
}

double net_reproduction_number(const AgeProfile& k, const AgeProfile& mu) {
  require_same_grid(k, mu, "net_reproduction_number");
  return inner(k, survival(mu));
}

AgeProfile resample(const AgeProfile& f, const AgeGrid& target) {
  if (f.grid() == target) return f;
  return AgeProfile::from_function(target, [&f](double a) { return f.at_age(a); });
}

FamilyParams FamilyParams::sample(Rng& rng) {
  FamilyParams p;
  for (int i = 0; i < 13; ++i) *field(p, i) = rng.uniform(kRanges[i].lo, kRanges[i].hi);
  return p;
}

bool FamilyParams::within_sampling_ranges() const {
  FamilyParams copy = *this;
  for (int i = 0; i < 13; ++i) {
    const double v = *field(copy, i);
    if (v < kRanges[i].lo || v > kRanges[i].hi) return false;
  }
  return true;
}

json FamilyParams::to_json() const {
  FamilyParams copy = *this;
  json j = json::object();
  for (int i = 0; i < 13; ++i) j[kNames[i]] = *field(copy, i);
  return j;
}

FamilyParams FamilyParams::from_json(const json& j) {
  FamilyParams p;
  for (int i = 0; i < 13; ++i) {
    if (!j.contains(kNames[i])) throw ShapeError(std::string("family params: missing ") + kNames[i]);
    *field(p, i) = j.at(kNames[i]).get<double>();
    if (*field(p, i) < 0.0) throw DomainError(std::string("family params: negative ") + kNames[i]);
  }
  return p;
}

FamilySample sample_family(const FamilyParams& p, const AgeGrid& grid) {
  auto k = AgeProfile::from_function(
      grid, [&](double a) { return p.k_base + p.k_amp * gauss(a, p.k_center, p.k_sigma); });
  auto mu = AgeProfile::from_function(grid, [&](double a) {
    return p.mu_base + p.mu_juv_amp * std::exp(-p.mu_juv * a) + p.mu_sen_amp * std::pow(a, p.mu_sen);
  });
  auto g = AgeProfile::from_function(
      grid, [&](double a) { return p.g_base + p.g_amp * gauss(a, p.g_center, p.g_sigma); });
  return {std::move(k), std::move(mu), std::move(g)};
}

void ClassBounds::validate() const {
  const AgeProfile* all[] = {&k_min, &k_max, &mu_min, &mu_max};
  for (const AgeProfile* p : all) require_same_grid(k_min, *p, "ClassBounds");
  for (std::size_t i = 0; i < k_min.size(); ++i) {
    if (k_min[i] > k_max[i]) throw DomainError("ClassBounds: k_min > k_max");
    if (mu_min[i] > mu_max[i]) throw DomainError("ClassBounds: mu_min > mu_max");
  }
  if (!(lipschitz_budget > 0.0)) throw DomainError("ClassBounds: lipschitz budget must be positive");
  if (!(net_reproduction_number(k_min, mu_max) > 1.0)) {
    throw DomainError("ClassBounds: int k_min exp(-int mu_max) must exceed 1");
  }
}

bool ClassBounds::contains(const AgeProfile& k, const AgeProfile& mu) const {
  if (!(k.grid() == k_min.grid()) || !(mu.grid() == k_min.grid())) return false;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < k_min[i] || k[i] > k_max[i] || mu[i] < mu_min[i] || mu[i] > mu_max[i]) return false;
  }
  return k.sup_norm() + k.lipschitz_seminorm() <= lipschitz_budget &&
         mu.sup_norm() + mu.lipschitz_seminorm() <= lipschitz_budget;
}

namespace {
AgeProfile clip(const AgeProfile& f, const AgeProfile& lo, const AgeProfile& hi) {
  require_same_grid(f, lo, "ClassBounds::clip");
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(f[i], lo[i], hi[i]);
  return AgeProfile(f.grid(), std::move(v));
}
}  // namespace

AgeProfile ClassBounds::clip_k(const AgeProfile& k) const { return clip(k, k_min, k_max); }
AgeProfile ClassBounds::clip_mu(const AgeProfile& mu) const { return clip(mu, mu_min, mu_max); }

ClassBounds ClassBounds::family_envelope(const AgeGrid& grid) {
  ClassBounds b;
  b.k_min = AgeProfile::from_function(grid, [](double a) { return 0.5 + 2.5 * gauss(a, 0.23, 0.15); });
  b.k_max = AgeProfile::from_function(grid, [](double a) { return 0.8 + 3.0 * gauss(a, 0.23, 0.23); });
  b.mu_min = AgeProfile::from_function(
      grid, [](double a) { return 0.03 + 0.05 * std::exp(-5.5 * a) + 0.03 * std::pow(a, 2.9); });
  b.mu_max = AgeProfile::from_function(
      grid, [](double a) { return 0.10 + 0.19 * std::exp(-3.5 * a) + 0.17 * std::pow(a, 1.7); });
  b.lipschitz_budget = 100.0;
  b.validate();
  return b;
}

json profile_to_json(const AgeProfile& f) {
  return json{{"max_age", f.grid().max_age}, {"values", f.vector()}};
}

AgeProfile profile_from_json(const json& j) {
  if (!j.is_object() || !j.contains("max_age") || !j.contains("values")) {
    throw ShapeError("profile JSON needs \"max_age\" and \"values\"");
  }
  auto values = j.at("values").get<std::vector<double>>();
  AgeGrid grid(j.at("max_age").get<double>(), values.size());
  return AgeProfile(grid, std::move(values));
}

}  // namespace lsctl
