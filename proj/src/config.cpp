#include "lsctl/config.hpp"

#include <cmath>

#include "lsctl/errors.hpp"
#include "lsctl/surrogate.hpp"

namespace lsctl {

namespace {

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ShapeError(std::string("species source: missing '") + key + "'");
  return j.at(key);
}

AgeProfile on_grid(const json& j, const AgeGrid& grid) { return resample(profile_from_json(j), grid); }

}  // namespace

FamilySample species_from_source(const json& source, const AgeGrid& grid) {
  try {
    if (!source.is_object() || source.size() != 1) {
      throw ShapeError("species source must have exactly one of 'sample', 'params', 'profiles'");
    }
    if (source.contains("sample")) {
      const json& s = source.at("sample");
      Rng rng = Rng::stream(member(s, "seed").get<std::uint64_t>(), member(s, "index").get<std::uint64_t>());
      return sample_family(FamilyParams::sample(rng), grid);
    }
    if (source.contains("params")) return sample_family(FamilyParams::from_json(source.at("params")), grid);
    if (source.contains("profiles")) {
      const json& p = source.at("profiles");
      return {on_grid(member(p, "k"), grid), on_grid(member(p, "mu"), grid), on_grid(member(p, "g"), grid)};
    }
    throw ShapeError("species source must have one of 'sample', 'params', 'profiles'");
  } catch (const json::exception& e) {
    throw ShapeError(std::string("species source: ") + e.what());
  }
}

json RunConfig::to_json() const {
  json j{{"grid", {{"max_age", grid.max_age}, {"n_points", grid.n_points}}},
         {"prey", prey},
         {"predator", predator},
         {"beta", controller.beta},
         {"epsilon", controller.epsilon},
         {"delta", delta},
         {"horizon", horizon},
         {"scheme", lsctl::to_string(scheme)},
         {"record_every", record_every},
         {"x1_initial_scale", x1_initial_scale},
         {"x2_initial_scale", x2_initial_scale},
         {"prey_estimate", prey_estimate},
         {"predator_estimate", predator_estimate},
         {"adaptive",
          {{"gamma_k", adaptive.gamma_k},
           {"gamma_mu", adaptive.gamma_mu},
           {"alpha", adaptive.alpha},
           {"estimator_r0_min", adaptive.estimator_r0_min}}},
         {"surrogate", surrogate},
         {"seed", seed}};
  j["u_star"] = u_star ? json(*u_star) : json(nullptr);
  j["x1_star0"] = x1_star0 ? json(*x1_star0) : json(nullptr);
  return j;
}

void RunConfig::merge(const json& j) {
  if (!j.is_object()) throw ShapeError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "grid") {
        grid = AgeGrid(v.value("max_age", grid.max_age), v.value("n_points", grid.n_points));
      } else if (key == "prey") {
        prey = v;
      } else if (key == "predator") {
        predator = v;
      } else if (key == "beta") {
        controller.beta = v.get<double>();
      } else if (key == "epsilon") {
        controller.epsilon = v.get<double>();
      } else if (key == "delta") {
        delta = v.get<double>();
      } else if (key == "horizon") {
        horizon = v.get<double>();
      } else if (key == "scheme") {
        scheme = pde_scheme_from_string(v.get<std::string>());
      } else if (key == "record_every") {
        record_every = v.get<std::size_t>();
      } else if (key == "x1_initial_scale") {
        x1_initial_scale = v.get<double>();
      } else if (key == "x2_initial_scale") {
        x2_initial_scale = v.get<double>();
      } else if (key == "prey_estimate") {
        prey_estimate = v;
      } else if (key == "predator_estimate") {
        predator_estimate = v;
      } else if (key == "adaptive") {
        adaptive.gamma_k = v.value("gamma_k", adaptive.gamma_k);
        adaptive.gamma_mu = v.value("gamma_mu", adaptive.gamma_mu);
        adaptive.alpha = v.value("alpha", adaptive.alpha);
        adaptive.estimator_r0_min = v.value("estimator_r0_min", adaptive.estimator_r0_min);
      } else if (key == "surrogate") {
        surrogate = v.get<std::string>();
      } else if (key == "seed") {
        seed = v.get<std::uint64_t>();
      } else if (key == "u_star") {
        u_star = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        if (u_star) x1_star0.reset();
      } else if (key == "x1_star0") {
        x1_star0 = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      } else {
        throw ShapeError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ShapeError(std::string("config: ") + e.what());
  }
}

Scenario build_scenario(const RunConfig& cfg) {
  cfg.controller.validate();
  if (!(cfg.horizon > 0.0)) throw DomainError("config: horizon must be positive");
  if (!(cfg.delta >= 0.0)) throw DomainError("config: delta must be nonnegative");
  const FamilySample p = species_from_source(cfg.prey, cfg.grid);
  const FamilySample q = species_from_source(cfg.predator, cfg.grid);
  Scenario sc{build_species(p.k, p.mu, p.g), build_species(q.k, q.mu, q.g), {}, {}};
  if (cfg.x1_star0) {
    sc.eq = build_equilibrium(sc.prey, sc.predator, *cfg.x1_star0);
  } else if (cfg.u_star) {
    sc.eq = build_equilibrium_for_dilution(sc.prey, sc.predator, *cfg.u_star);
  } else {
    throw SetpointError("config: set either u_star or x1_star0");
  }
  if (!(cfg.x1_initial_scale > 0.0) || !(cfg.x2_initial_scale > 0.0)) {
    throw DomainError("config: initial scales must be positive");
  }
  sc.initial = {AgeProfile::constant(cfg.grid, cfg.x1_initial_scale * sc.eq.x1_star0),
                AgeProfile::constant(cfg.grid, cfg.x2_initial_scale * sc.eq.x2_star0), 0.0};
  return sc;
}

ZetaEstimator load_estimator(const std::string& spec) {
  if (spec.empty() || spec == "exact") return {};
  return as_estimator(SurrogateModel::load(spec));
}

PerturbationLedger scenario_ledger(const RunConfig& cfg, const Scenario& sc) {
  const ZetaEstimator est = load_estimator(cfg.surrogate);
  if (!est) return hatted_quantities(0.0, 0.0, sc.prey, sc.predator, sc.eq);
  const double z1 = est(sc.prey.k, sc.prey.mu), z2 = est(sc.predator.k, sc.predator.mu);
  return hatted_quantities(z1 - sc.prey.zeta, z2 - sc.predator.zeta, sc.prey, sc.predator, sc.eq);
}

}  // namespace lsctl
