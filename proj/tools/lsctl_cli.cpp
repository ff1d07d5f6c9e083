// lsctl: command-line front end.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsctl/config.hpp"
#include "lsctl/errors.hpp"
#include "lsctl/manifest.hpp"
#include "lsctl/robustness.hpp"
#include "lsctl/surrogate.hpp"

namespace fs = std::filesystem;
using namespace lsctl;

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error\n"
    "  2  domain error (e.g. R0 <= 1: not in set B)\n"
    "  3  root finder did not converge\n"
    "  4  setpoint cannot be realized\n"
    "  5  blow-up or extinction during a simulation\n"
    "  6  malformed input (shape, format, model file)\n"
    "  7  certificate could not be established\n"
    "  8  file I/O error\n";

/// Files written by the current command; removed unless commit() is called.
class Outputs {
 public:
  explicit Outputs(const std::string& dir = "") {
    if (!dir.empty() && !fs::exists(dir)) {
      fs::create_directories(dir);
      created_dir_ = dir;
    }
  }
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (!created_dir_.empty() && fs::is_empty(created_dir_, ec)) fs::remove(created_dir_, ec);
  }
  std::string add(const std::string& path) {
    files_.push_back(path);
    return path;
  }
  const std::vector<std::string>& files() const { return files_; }
  void commit() { committed_ = true; }

 private:
  std::vector<std::string> files_;
  std::string created_dir_;
  bool committed_ = false;
};

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ShapeError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Flags shared by the commands that take a RunConfig.
struct ConfigFlags {
  std::string config_path;
  double beta = 0, epsilon = 0, delta = 0, u_star = 0, x1_star0 = 0, horizon = 0, max_age = 0;
  std::size_t grid_n = 0, record_every = 0;
  std::string scheme, surrogate;
  std::uint64_t seed = 0;
  std::vector<std::pair<CLI::Option*, const char*>> opts;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
    opts = {{app->add_option("--beta", beta, "controller gain beta"), "beta"},
            {app->add_option("--epsilon", epsilon, "controller weight epsilon"), "epsilon"},
            {app->add_option("--u-star", u_star, "commanded dilution u*"), "u_star"},
            {app->add_option("--x1-star0", x1_star0, "commanded prey newborn density x1*(0)"), "x1_star0"},
            {app->add_option("--horizon", horizon, "simulation horizon"), "horizon"},
            {app->add_option("--max-age", max_age, "maximal age A"), "max_age"},
            {app->add_option("--grid-n", grid_n, "number of age nodes"), "n_points"},
            {app->add_option("--record-every", record_every, "keep every k-th step"), "record_every"},
            {app->add_option("--scheme", scheme, "PDE scheme: exponential or upwind"), "scheme"},
            {app->add_option("--surrogate", surrogate, "\"exact\" or a *.model.json path"), "surrogate"},
            {app->add_option("--seed", seed, "seed"), "seed"}};
  }
  void attach_delta(CLI::App* app) { opts.push_back({app->add_option("--delta", delta, "error budget"), "delta"}); }

  /// flags > config file > defaults; sources records which one won for each key.
  RunConfig resolve(json& sources) const {
    RunConfig cfg;
    const json defaults = cfg.to_json();
    for (const auto& [k, v] : defaults.items()) sources[k] = "default";
    if (!config_path.empty()) {
      const json file = read_json_file(config_path);
      cfg.merge(file);
      for (const auto& [k, v] : file.items()) sources[k] = "config";
    }
    json flags = json::object();
    json grid = {{"max_age", cfg.grid.max_age}, {"n_points", cfg.grid.n_points}};
    bool grid_flag = false;
    for (const auto& [opt, key] : opts) {
      if (opt->count() == 0) continue;
      const std::string k = key;
      if (k == "beta") flags[k] = beta;
      if (k == "epsilon") flags[k] = epsilon;
      if (k == "delta") flags[k] = delta;
      if (k == "u_star") flags[k] = u_star;
      if (k == "x1_star0") flags[k] = x1_star0;
      if (k == "horizon") flags[k] = horizon;
      if (k == "record_every") flags[k] = record_every;
      if (k == "scheme") flags[k] = scheme;
      if (k == "surrogate") flags[k] = surrogate;
      if (k == "seed") flags[k] = seed;
      if (k == "max_age") grid[k] = max_age, grid_flag = true;
      if (k == "n_points") grid[k] = grid_n, grid_flag = true;
    }
    if (grid_flag) flags["grid"] = grid;
    cfg.merge(flags);
    for (const auto& [k, v] : flags.items()) sources[k] = "flag";
    return cfg;
  }
};

double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

// ---- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string k_path, mu_path, g_path, params_path, source_path, out;
  std::uint64_t sample_seed = 1, sample_index = 0;
  double max_age = 1.0;
  std::size_t grid_n = 201;
  bool oracle = false;
};

double bisection_root(const AgeProfile& k, const AgeProfile& mu) {
  const ZetaBounds b = zeta_bounds(k, mu);
  double lo = b.lower, hi = b.upper;
  while (ls_integral(k, mu, hi) > 1.0) hi = 2.0 * hi + 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (ls_integral(k, mu, mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int cmd_solve(const SolveArgs& a) {
  const AgeGrid grid(a.max_age, a.grid_n);
  json source;
  AgeProfile k, mu;
  std::optional<AgeProfile> g;
  if (!a.k_path.empty() || !a.mu_path.empty()) {
    if (a.k_path.empty() || a.mu_path.empty()) throw CLI::ValidationError("--k and --mu go together");
    k = profile_from_json(read_json_file(a.k_path));
    mu = resample(profile_from_json(read_json_file(a.mu_path)), k.grid());
    if (!a.g_path.empty()) g = resample(profile_from_json(read_json_file(a.g_path)), k.grid());
  } else {
    if (!a.params_path.empty()) {
      source = {{"params", read_json_file(a.params_path)}};
    } else if (!a.source_path.empty()) {
      source = read_json_file(a.source_path);
    } else {
      source = {{"sample", {{"seed", a.sample_seed}, {"index", a.sample_index}}}};
    }
    FamilySample s = species_from_source(source, grid);
    k = s.k;
    mu = s.mu;
    g = s.g;
  }
  const LSRoot root = g_ls(k, mu);
  const double kappa = g_kappa(k, mu, root.zeta);
  const AgeProfile pi0 = g_pi(k, mu, root.zeta);
  json out{{"zeta", root.zeta},
           {"residual", root.residual},
           {"iterations", root.iterations},
           {"bounds", {{"lower", root.lower_bound}, {"upper", root.upper_bound}}},
           {"kappa", kappa},
           {"r0", net_reproduction_number(k, mu)},
           {"pi0", {{"at_0", pi0.front()}, {"sup", pi0.sup_norm()}, {"integral", integrate(pi0)}}},
           {"grid", {{"max_age", k.grid().max_age}, {"n_points", k.grid().n_points}}}};
  if (g) out["gamma"] = g_gamma(*g, root.zeta, mu);
  if (a.oracle) {
    const AgeGrid fine(k.grid().max_age, 10 * (k.grid().n_points - 1) + 1);
    AgeProfile kf, mf;
    if (source.is_null()) {
      kf = resample(k, fine);
      mf = resample(mu, fine);
    } else {
      FamilySample s = species_from_source(source, fine);
      kf = s.k;
      mf = s.mu;
    }
    const double z = bisection_root(kf, mf);
    out["oracle"] = {{"zeta", z}, {"discrepancy", std::abs(z - root.zeta)}, {"n_points", fine.n_points}};
  }
  if (a.out.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    Outputs files;
    write_json_file(files.add(a.out), out);
    files.commit();
  }
  return 0;
}

// ---- dataset ---------------------------------------------------------------

struct DatasetArgs {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double max_age = 1.0;
  std::size_t grid_n = 201;
  std::string out = "dataset.jsonl";
  unsigned jobs = 1;
};

std::string manifest_path_for(const std::string& file) {
  fs::path p(file);
  return (p.parent_path() / (p.stem().string() + ".manifest.json")).string();
}

int cmd_dataset(const DatasetArgs& a) {
  const AgeGrid grid(a.max_age, a.grid_n);
  const fs::path parent = fs::path(a.out).parent_path();
  Outputs files(parent.string());
  const Dataset ds = generate_dataset(a.n, a.seed, grid, a.jobs);
  write_jsonl(files.add(a.out), ds.records);
  std::cerr << "dataset: accepted " << ds.records.size() << " of " << ds.candidates << " draws (rate "
            << format_double(ds.acceptance_rate()) << ")\n";
  RunManifest m;
  m.command = "dataset";
  m.config = {{"n", a.n},
              {"seed", a.seed},
              {"grid", {{"max_age", grid.max_age}, {"n_points", grid.n_points}}},
              {"r0_min", kDatasetR0Min}};
  m.sources = {{"n", "flag"}, {"seed", "flag"}, {"grid", "flag"}};
  m.seeds = {a.seed};
  m.outputs = files.files();
  json extra = m.to_json();
  extra["acceptance_rate"] = ds.acceptance_rate();
  extra["candidates"] = ds.candidates;
  write_json_file(files.add(manifest_path_for(a.out)), extra);
  files.commit();
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  ConfigFlags flags;
  std::string out = "simulate_out";
  bool eta = false;
};

void write_manifest(Outputs& files, const std::string& dir, const std::string& command, const RunConfig& cfg,
                    const json& sources) {
  RunManifest m;
  m.command = command;
  m.config = cfg.to_json();
  m.sources = sources;
  m.seeds = {cfg.seed};
  m.outputs = files.files();
  m.outputs.push_back(join(dir, "manifest.json"));
  m.write(files.add(join(dir, "manifest.json")));
}

int cmd_simulate(const SimulateArgs& a) {
  json sources;
  const RunConfig cfg = a.flags.resolve(sources);
  const Scenario sc = build_scenario(cfg);
  const PerturbationLedger ledger = scenario_ledger(cfg, sc);
  Outputs files(a.out);
  PdeRunOptions opt;
  opt.horizon = cfg.horizon;
  opt.scheme = cfg.scheme;
  opt.record_every = cfg.record_every;
  const PdeTrajectory tr = simulate_closed_loop_pde(sc.initial, sc.prey, sc.predator, sc.eq, cfg.controller,
                                                    ledger, opt);
  write_trajectory_csv(files.add(join(a.out, "trajectory.csv")), tr);
  json summary{{"equilibrium", static_cast<const EquilibriumScalars&>(sc.eq).to_json()},
               {"ledger", ledger.to_json()},
               {"final",
                {{"t", tr.t.back()},
                 {"x1_boundary", tr.x1_boundary.back()},
                 {"x2_boundary", tr.x2_boundary.back()},
                 {"x1_rel_error", std::abs(tr.x1_boundary.back() / sc.eq.x1_star0 - 1.0)},
                 {"x2_rel_error", std::abs(tr.x2_boundary.back() / sc.eq.x2_star0 - 1.0)},
                 {"u", tr.u.back()},
                 {"r", tr.r.back()}}},
               {"min_u", min_of(tr.u)},
               {"min_u_unclamped", min_of(tr.u_raw)},
               {"clamp_events", tr.clamp_events}};
  if (a.eta) {
    EtaIntegrationOptions eo;
    eo.horizon = cfg.horizon;
    eo.dt = sc.prey.grid().spacing();
    eo.record_every = cfg.record_every;
    const PopulationState p = project_initial_condition(sc.initial, sc.prey, sc.predator);
    const EtaState eta0 = eta_from_populations(p.x1, p.x2, sc.eq, sc.prey, sc.predator);
    const EtaTrajectory et = integrate_eta(eta0, sc.eq, cfg.controller, ledger, eo);
    write_eta_trajectory_csv(files.add(join(a.out, "eta_trajectory.csv")), et);
    summary["eta_final"] = {{"eta1", et.final_state.eta1}, {"eta2", et.final_state.eta2}};
  }
  write_json_file(files.add(join(a.out, "summary.json")), summary);
  write_manifest(files, a.out, "simulate", cfg, sources);
  std::cout << summary.dump(2) << '\n';
  files.commit();
  return 0;
}

// ---- adaptive --------------------------------------------------------------

struct AdaptiveArgs {
  ConfigFlags flags;
  std::string out = "adaptive_out";
  std::size_t snapshots = 0;
};

int cmd_adaptive(const AdaptiveArgs& a) {
  json sources;
  const RunConfig cfg = a.flags.resolve(sources);
  const Scenario sc = build_scenario(cfg);
  const FamilySample e1 = species_from_source(cfg.prey_estimate, cfg.grid);
  const FamilySample e2 = species_from_source(cfg.predator_estimate, cfg.grid);
  AdaptiveConfig ac = cfg.adaptive;
  ac.horizon = cfg.horizon;
  ac.record_every = cfg.record_every;
  const double h = cfg.grid.spacing();
  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / h));
  if (a.snapshots > 0) {
    Rng rng = Rng::stream(cfg.seed, 0);
    std::set<std::size_t> picks;
    while (picks.size() < std::min(a.snapshots, steps + 1)) {
      picks.insert(std::min(steps, static_cast<std::size_t>(rng.uniform() * static_cast<double>(steps + 1))));
    }
    ac.snapshot_steps.assign(picks.begin(), picks.end());
  }
  Outputs files(a.out);
  const AdaptiveTrajectory tr = simulate_adaptive(sc.initial, {e1.k, e2.k}, {e1.mu, e2.mu}, sc.prey, sc.predator,
                                                  sc.eq, cfg.controller, ac, load_estimator(cfg.surrogate));
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << '\n';
  write_adaptive_csv(files.add(join(a.out, "adaptive.csv")), tr);

  std::size_t excluded = 0;
  if (a.snapshots > 0) {
    std::vector<DatasetRecord> recs;
    const std::array<const SpeciesSpec*, 2> truth{&sc.prey, &sc.predator};
    for (const auto& snap : tr.snapshots) {
      for (int i = 0; i < 2; ++i) {
        DatasetRecord r;
        r.grid = cfg.grid;
        r.k = snap.k_hat[i].vector();
        r.mu = snap.mu_hat[i].vector();
        r.g = truth[i]->g.vector();
        r.r0 = net_reproduction_number(snap.k_hat[i], snap.mu_hat[i]);
        r.index = recs.size() + excluded;
        if (!(r.r0 > 1.0)) {
          ++excluded;
          continue;
        }
        r.zeta = g_ls(snap.k_hat[i], snap.mu_hat[i]).zeta;
        recs.push_back(std::move(r));
      }
    }
    write_jsonl(files.add(join(a.out, "snapshots.jsonl")), recs);
  }
  const std::size_t last = tr.t.size() - 1;
  json summary{{"equilibrium", static_cast<const EquilibriumScalars&>(sc.eq).to_json()},
               {"final",
                {{"t", tr.t[last]},
                 {"x1_boundary", tr.x1_boundary[last]},
                 {"x2_boundary", tr.x2_boundary[last]},
                 {"x1_rel_error", std::abs(tr.x1_boundary[last] / sc.eq.x1_star0 - 1.0)},
                 {"x2_rel_error", std::abs(tr.x2_boundary[last] / sc.eq.x2_star0 - 1.0)},
                 {"u", tr.u[last]},
                 {"zeta1_hat", tr.zeta1_hat[last]},
                 {"zeta2_hat", tr.zeta2_hat[last]}}},
               {"min_u", min_of(tr.u)},
               {"clamp_events", tr.clamp_events},
               {"estimate_clamps", tr.estimate_clamps},
               {"surrogate_fallbacks", tr.estimator_fallbacks},
               {"held_estimates", tr.held_estimates},
               {"snapshots", tr.snapshots.size()},
               {"excluded_snapshots", excluded}};
  write_json_file(files.add(join(a.out, "summary.json")), summary);
  write_manifest(files, a.out, "adaptive", cfg, sources);
  std::cout << summary.dump(2) << '\n';
  files.commit();
  return 0;
}

// ---- robustness ------------------------------------------------------------

struct RobustnessArgs {
  ConfigFlags flags;
  std::vector<double> deltas{0.0, 0.005, 0.02};
  std::string out = "robustness_out";
  std::size_t n_ic = 20;
  unsigned jobs = 1;
};

int cmd_robustness(const RobustnessArgs& a) {
  json sources;
  const RunConfig cfg = a.flags.resolve(sources);
  const Scenario sc = build_scenario(cfg);
  SweepOptions so;
  so.horizon = cfg.horizon;
  so.n_initial_conditions = a.n_ic;
  so.jobs = a.jobs;
  Outputs files(a.out);
  const std::vector<SweepRow> rows = robustness_sweep(a.deltas, sc.prey, sc.predator, sc.eq, cfg.controller, so);
  write_sweep_csv(files.add(join(a.out, "sweep.csv")), rows);
  json certs = json::array();
  for (const auto& r : rows) {
    json c = r.certificate.to_json();
    c["certified"] = r.certified();
    c["tail_r"] = r.tail_r;
    c["clamp_events"] = r.clamp_events;
    c["max_V1_excursion"] = r.max_V1_excursion;
    c["C_R_empirical"] = r.C_R_empirical;
    certs.push_back(c);
    std::cout << "delta=" << format_double(r.delta) << " c*=" << format_double(r.c_star)
              << " c=" << format_double(r.c) << " C_R=" << format_double(r.C_R_constructive)
              << " tail_r=" << format_double(r.tail_r) << " mu_c=" << format_double(r.mu_c)
              << " certified=" << (r.certified() ? "yes" : "no") << '\n';
  }
  write_json_file(files.add(join(a.out, "certificates.json")), certs);
  write_manifest(files, a.out, "robustness", cfg, sources);
  files.commit();
  return 0;
}

// ---- audits ------------------------------------------------------------------

struct LipschitzArgs {
  std::size_t pairs = 1000, ordered = 100, grid_n = 201;
  std::uint64_t seed = 1;
  double max_age = 1.0;
  unsigned jobs = 1;
  std::string out;
};

int cmd_audit_lipschitz(const LipschitzArgs& a) {
  const AgeGrid grid(a.max_age, a.grid_n);
  const LipschitzAuditReport rep = lipschitz_audit(ClassBounds::family_envelope(grid), a.pairs, a.seed, a.ordered,
                                                   a.jobs);
  json j = rep.to_json();
  j["passed"] = rep.max_ratio <= 1.0 && rep.monotonicity_violations == 0;
  std::cout << j.dump(2) << '\n';
  if (!a.out.empty()) {
    Outputs files;
    write_json_file(files.add(a.out), j);
    files.commit();
  }
  return 0;
}

struct SurrogateAuditArgs {
  ConfigFlags flags;
  std::string model = "exact", dataset, out;
  std::size_t n = 100;
  std::uint64_t test_seed = 2;
  bool sweep = false;
  unsigned jobs = 1;
};

int cmd_audit_surrogate(const SurrogateAuditArgs& a) {
  json sources;
  const RunConfig cfg = a.flags.resolve(sources);
  const ZetaEstimator est = load_estimator(a.model);
  const std::vector<DatasetRecord> test =
      a.dataset.empty() ? generate_dataset(a.n, a.test_seed, cfg.grid, a.jobs).records : read_jsonl(a.dataset);
  const ErrorBudgetReport rep = error_budget_audit(est, test, cfg.delta);
  json j = rep.to_json();
  j["model"] = a.model;
  if (a.sweep) {
    const Scenario sc = build_scenario(cfg);
    SweepOptions so;
    so.horizon = cfg.horizon;
    so.jobs = a.jobs;
    const SweepRow row = robustness_sweep({rep.delta_hat}, sc.prey, sc.predator, sc.eq, cfg.controller, so).front();
    json c = row.certificate.to_json();
    c["certified"] = row.certified();
    c["tail_r"] = row.tail_r;
    c["clamp_events"] = row.clamp_events;
    j["sweep"] = c;
  }
  std::cout << j.dump(2) << '\n';
  if (!a.out.empty()) {
    Outputs files;
    write_json_file(files.add(a.out), j);
    files.commit();
  }
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 3;
  if (dynamic_cast<const SetpointError*>(&e)) return 4;
  if (dynamic_cast<const BlowupError*>(&e) || dynamic_cast<const ExtinctionError*>(&e)) return 5;
  if (dynamic_cast<const ShapeError*>(&e)) return 6;
  if (dynamic_cast<const CertificateError*>(&e)) return 7;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 8;
  if (dynamic_cast<const std::runtime_error*>(&e)) return 8;
  return 1;
}

const char* error_name(int code) {
  switch (code) {
    case 2:
      return "DomainError";
    case 3:
      return "ConvergenceError";
    case 4:
      return "SetpointError";
    case 5:
      return "SimulationError";
    case 6:
      return "ShapeError";
    case 7:
      return "CertificateError";
    case 8:
      return "IOError";
    default:
      return "Error";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lotka-Sharpe operator, predator-prey dilution control and robustness certificates"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve the Lotka-Sharpe condition for one species");
  s->add_option("--k", solve.k_path, "fertility profile JSON {max_age, values}")->check(CLI::ExistingFile);
  s->add_option("--mu", solve.mu_path, "mortality profile JSON")->check(CLI::ExistingFile);
  s->add_option("--g", solve.g_path, "interaction profile JSON")->check(CLI::ExistingFile);
  s->add_option("--params", solve.params_path, "family parameters JSON")->check(CLI::ExistingFile);
  s->add_option("--source", solve.source_path, "species source JSON")->check(CLI::ExistingFile);
  s->add_option("--sample-seed", solve.sample_seed, "family draw seed");
  s->add_option("--sample-index", solve.sample_index, "family draw index");
  s->add_option("--max-age", solve.max_age, "maximal age A");
  s->add_option("--grid-n", solve.grid_n, "number of age nodes");
  s->add_flag("--oracle", solve.oracle, "also bisect on a 10x finer grid");
  s->add_option("--out", solve.out, "write the JSON here instead of stdout");
  s->footer(kExitCodes);

  DatasetArgs dataset;
  auto* d = app.add_subcommand("dataset", "Generate a JSONL dataset of (k, mu, g, zeta) records");
  d->add_option("--n", dataset.n, "number of accepted records");
  d->add_option("--seed", dataset.seed, "seed");
  d->add_option("--max-age", dataset.max_age, "maximal age A");
  d->add_option("--grid-n", dataset.grid_n, "number of age nodes");
  d->add_option("--out", dataset.out, "output .jsonl");
  d->add_option("--jobs", dataset.jobs, "worker threads")->check(CLI::PositiveNumber);
  d->footer(kExitCodes);

  SimulateArgs simulate;
  auto* m = app.add_subcommand("simulate", "Closed-loop PDE simulation");
  simulate.flags.attach(m);
  m->add_option("--out", simulate.out, "output directory");
  m->add_flag("--eta", simulate.eta, "also integrate the reduced eta system");
  m->footer(kExitCodes);

  AdaptiveArgs adaptive;
  auto* ad = app.add_subcommand("adaptive", "Closed loop with online estimates of k and mu");
  adaptive.flags.attach(ad);
  ad->add_option("--out", adaptive.out, "output directory");
  ad->add_option("--snapshots", adaptive.snapshots, "write estimates at this many random steps");
  ad->footer(kExitCodes);

  RobustnessArgs robust;
  auto* r = app.add_subcommand("robustness", "Certified levels and trajectory checks per error budget");
  robust.flags.attach(r);
  r->add_option("--delta", robust.deltas, "error budgets")->expected(1, -1);
  r->add_option("--n-ic", robust.n_ic, "initial conditions on the level set");
  r->add_option("--out", robust.out, "output directory");
  r->add_option("--jobs", robust.jobs, "worker threads")->check(CLI::PositiveNumber);
  r->footer(kExitCodes);

  LipschitzArgs lip;
  auto* l = app.add_subcommand("audit-lipschitz", "Empirical check of the Lipschitz constant of zeta");
  l->add_option("--pairs", lip.pairs, "random pairs");
  l->add_option("--ordered", lip.ordered, "ordered pairs for the monotonicity check");
  l->add_option("--seed", lip.seed, "seed");
  l->add_option("--max-age", lip.max_age, "maximal age A");
  l->add_option("--grid-n", lip.grid_n, "number of age nodes");
  l->add_option("--jobs", lip.jobs, "worker threads")->check(CLI::PositiveNumber);
  l->add_option("--out", lip.out, "also write the report here");
  l->footer(kExitCodes);

  SurrogateAuditArgs sa;
  auto* su = app.add_subcommand("audit-surrogate", "Error budget of a surrogate model on a test set");
  sa.flags.attach(su);
  su->add_option("--model", sa.model, "\"exact\" or a *.model.json path");
  su->add_option("--dataset", sa.dataset, "test set JSONL (default: generated)")->check(CLI::ExistingFile);
  su->add_option("--n", sa.n, "generated test set size");
  su->add_option("--test-seed", sa.test_seed, "generated test set seed");
  sa.flags.attach_delta(su);
  su->add_flag("--sweep", sa.sweep, "run the robustness sweep at delta_hat");
  su->add_option("--jobs", sa.jobs, "worker threads")->check(CLI::PositiveNumber);
  su->add_option("--out", sa.out, "also write the report here");
  su->footer(kExitCodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*d) return cmd_dataset(dataset);
    if (*m) return cmd_simulate(simulate);
    if (*ad) return cmd_adaptive(adaptive);
    if (*r) return cmd_robustness(robust);
    if (*l) return cmd_audit_lipschitz(lip);
    if (*su) return cmd_audit_surrogate(sa);
  } catch (const CLI::Error& e) {
    std::cerr << json{{"error", "UsageError"}, {"message", e.what()}, {"exit_code", 1}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::cerr << json{{"error", error_name(code)}, {"message", e.what()}, {"exit_code", code}}.dump() << '\n';
    return code;
  }
  return 1;
}
