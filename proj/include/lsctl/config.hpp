#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lsctl/adaptive.hpp"

namespace lsctl {

/// Where a species comes from, as JSON. One of
///   {"sample": {"seed": S, "index": I}}   family draw from Rng::stream(S, I)
///   {"params": {...FamilyParams...}}
///   {"profiles": {"k": P, "mu": P, "g": P}} with P as in profile_to_json
/// Profiles on another grid are resampled.
FamilySample species_from_source(const json& source, const AgeGrid& grid);

/// Everything a simulation or certificate run needs. Unset keys keep their defaults.
struct RunConfig {
  AgeGrid grid{1.0, 201};
  json prey = {{"sample", {{"seed", 1}, {"index", 2}}}};
  json predator = {{"sample", {{"seed", 1}, {"index", 8}}}};
  ControllerConfig controller{};
  std::optional<double> u_star = 0.83;  ///< used when x1_star0 is unset
  std::optional<double> x1_star0;
  double delta = 0.05;  ///< error budget a surrogate audit certifies against
  double horizon = 50.0;
  PdeScheme scheme = PdeScheme::exponential;
  std::size_t record_every = 10;
  double x1_initial_scale = 2.0;  ///< initial x1 = scale x1*(0), constant in age
  double x2_initial_scale = 0.3;
  json prey_estimate = {{"sample", {{"seed", 1}, {"index", 1}}}};
  json predator_estimate = {{"sample", {{"seed", 1}, {"index", 3}}}};
  AdaptiveConfig adaptive{};
  std::string surrogate = "exact";  ///< "exact" or a *.model.json path
  std::uint64_t seed = 1;

  json to_json() const;
  /// Overlays the keys present in j; ShapeError on unknown keys or wrong types.
  void merge(const json& j);
};

/// Species, setpoint and initial data built from a RunConfig.
struct Scenario {
  SpeciesSpec prey, predator;
  EquilibriumSpec eq;
  PopulationState initial;
};

Scenario build_scenario(const RunConfig& cfg);

/// "exact" (or empty) gives an empty estimator, meaning the exact solver; otherwise a model file.
ZetaEstimator load_estimator(const std::string& spec);

/// Ledger at the errors the configured surrogate makes on the true profiles; zero errors for "exact".
PerturbationLedger scenario_ledger(const RunConfig& cfg, const Scenario& sc);

}  // namespace lsctl
