#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lsctl/adaptive.hpp"

namespace lsctl {

/// One training pair: sampled profiles and the exact root.
struct DatasetRecord {
  AgeGrid grid;
  std::vector<double> k, mu, g;
  double zeta = 0.0;
  double r0 = 0.0;
  std::uint64_t index = 0;  ///< stream index the draw came from
  FamilyParams params;

  json to_json() const;
  /// ShapeError on missing keys or inconsistent lengths.
  static DatasetRecord from_json(const json& j);
  AgeProfile k_profile() const { return AgeProfile(grid, k); }
  AgeProfile mu_profile() const { return AgeProfile(grid, mu); }
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::size_t candidates = 0;  ///< draws examined, accepted or not
  double acceptance_rate() const {
    return candidates ? static_cast<double>(records.size()) / static_cast<double>(candidates) : 0.0;
  }
};

inline constexpr double kDatasetR0Min = 1.2;

/// Exactly n records with R0 > 1.2; draw i uses Rng::stream(seed, i), so the result does not
/// depend on jobs.
Dataset generate_dataset(std::size_t n, std::uint64_t seed, const AgeGrid& grid, unsigned jobs = 1);

void write_jsonl(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_jsonl(const std::string& path);

enum class Activation { relu, tanh, gelu, identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  std::size_t in = 0, out = 0;
  std::vector<double> weight;  ///< out x in, row-major
  std::vector<double> bias;    ///< out
  Activation activation = Activation::identity;
};

/// Dense feed-forward network mapping (k, mu) resampled to grid_size points each to zeta.
struct SurrogateModel {
  std::size_t grid_size = 64;
  double max_age = 1.0;
  std::vector<DenseLayer> layers;
  json metadata = json::object();

  /// ShapeError unless the layers chain from 2 grid_size inputs to one output.
  void validate() const;
  double forward(std::span<const double> input) const;
  /// k then mu, each linearly resampled to grid_size points on [0, max_age].
  std::vector<double> features(const AgeProfile& k, const AgeProfile& mu) const;
  double operator()(const AgeProfile& k, const AgeProfile& mu) const { return forward(features(k, mu)); }

  json to_json() const;
  static SurrogateModel from_json(const json& j);
  static SurrogateModel load(const std::string& path);
  void save(const std::string& path) const;
};

/// Little-endian float64 array as base64 text, and back.
std::string encode_doubles(std::span<const double> v);
std::vector<double> decode_doubles(const std::string& text);

ZetaEstimator as_estimator(const SurrogateModel& model);

struct ErrorBudgetReport {
  std::size_t n = 0;
  double max_abs_error = 0.0;
  double mse = 0.0;
  double delta_hat = 0.0;  ///< 2 max |zeta - zeta_hat|
  double delta = 0.0;
  bool certified = false;  ///< delta_hat < delta
  json to_json() const;
};

ErrorBudgetReport error_budget_audit(const ZetaEstimator& model, const std::vector<DatasetRecord>& test_set,
                                     double delta);

}  // namespace lsctl
