// Python module lsctl._core. Structured results cross as JSON text; lsctl/__init__.py decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsctl/config.hpp"
#include "lsctl/errors.hpp"
#include "lsctl/robustness.hpp"
#include "lsctl/surrogate.hpp"

namespace py = pybind11;
using namespace lsctl;

namespace {

AgeProfile profile(double max_age, const std::vector<double>& values) {
  return AgeProfile(AgeGrid(max_age, values.size()), values);
}

RunConfig config_from(const std::string& text) {
  RunConfig cfg;
  if (!text.empty()) cfg.merge(json::parse(text));
  return cfg;
}

json trajectory_json(const PdeTrajectory& tr) {
  return json{{"t", tr.t},
              {"eta1", tr.eta1},
              {"eta2", tr.eta2},
              {"u", tr.u},
              {"u_raw", tr.u_raw},
              {"V1", tr.V1},
              {"r", tr.r},
              {"x1_boundary", tr.x1_boundary},
              {"x2_boundary", tr.x2_boundary},
              {"x1_total", tr.x1_total},
              {"x2_total", tr.x2_total},
              {"clamp_events", tr.clamp_events}};
}

std::string solve(double max_age, const std::vector<double>& k, const std::vector<double>& mu) {
  const AgeProfile K = profile(max_age, k), M = profile(max_age, mu);
  const LSRoot r = g_ls(K, M);
  const AgeProfile pi0 = g_pi(K, M, r.zeta);
  return json{{"zeta", r.zeta},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"bounds", {{"lower", r.lower_bound}, {"upper", r.upper_bound}}},
              {"kappa", g_kappa(K, M, r.zeta)},
              {"r0", net_reproduction_number(K, M)},
              {"pi0", pi0.vector()}}
      .dump();
}

std::string family(std::uint64_t seed, std::uint64_t index, double max_age, std::size_t n_points) {
  Rng rng = Rng::stream(seed, index);
  const FamilyParams p = FamilyParams::sample(rng);
  const FamilySample s = sample_family(p, AgeGrid(max_age, n_points));
  return json{{"params", p.to_json()}, {"k", s.k.vector()}, {"mu", s.mu.vector()}, {"g", s.g.vector()}}.dump();
}

std::string equilibrium(const std::string& config) {
  const RunConfig cfg = config_from(config);
  const Scenario sc = build_scenario(cfg);
  json j = static_cast<const EquilibriumScalars&>(sc.eq).to_json();
  j["x1_star"] = sc.eq.x1_star.vector();
  j["x2_star"] = sc.eq.x2_star.vector();
  return j.dump();
}

std::string simulate(const std::string& config) {
  const RunConfig cfg = config_from(config);
  const Scenario sc = build_scenario(cfg);
  PdeRunOptions opt;
  opt.horizon = cfg.horizon;
  opt.scheme = cfg.scheme;
  opt.record_every = cfg.record_every;
  const PdeTrajectory tr = simulate_closed_loop_pde(sc.initial, sc.prey, sc.predator, sc.eq, cfg.controller,
                                                    scenario_ledger(cfg, sc), opt);
  json j = trajectory_json(tr);
  j["equilibrium"] = static_cast<const EquilibriumScalars&>(sc.eq).to_json();
  return j.dump();
}

std::string robustness(const std::string& config, const std::vector<double>& deltas, std::size_t n_ic,
                       unsigned jobs) {
  const RunConfig cfg = config_from(config);
  const Scenario sc = build_scenario(cfg);
  SweepOptions so;
  so.horizon = cfg.horizon;
  so.n_initial_conditions = n_ic;
  so.jobs = jobs;
  json out = json::array();
  for (const SweepRow& r : robustness_sweep(deltas, sc.prey, sc.predator, sc.eq, cfg.controller, so)) {
    json c = r.certificate.to_json();
    c["certified"] = r.certified();
    c["tail_r"] = r.tail_r;
    c["clamp_events"] = r.clamp_events;
    c["max_V1_excursion"] = r.max_V1_excursion;
    c["C_R_empirical"] = r.C_R_empirical;
    out.push_back(c);
  }
  return out.dump();
}

std::string dataset(std::size_t n, std::uint64_t seed, double max_age, std::size_t n_points, unsigned jobs,
                    const std::string& out) {
  const Dataset d = generate_dataset(n, seed, AgeGrid(max_age, n_points), jobs);
  if (!out.empty()) write_jsonl(out, d.records);
  json recs = json::array();
  for (const auto& r : d.records) recs.push_back(r.to_json());
  return json{{"records", recs}, {"candidates", d.candidates}, {"acceptance_rate", d.acceptance_rate()}}.dump();
}

std::string audit_surrogate(const std::string& model, const std::string& dataset_path, std::size_t n,
                            std::uint64_t test_seed, double delta) {
  const std::vector<DatasetRecord> test =
      dataset_path.empty() ? generate_dataset(n, test_seed, AgeGrid{}).records : read_jsonl(dataset_path);
  return error_budget_audit(load_estimator(model), test, delta).to_json().dump();
}

std::string audit_lipschitz(std::size_t pairs, std::size_t ordered, std::uint64_t seed, std::size_t n_points,
                            unsigned jobs) {
  return lipschitz_audit(ClassBounds::family_envelope(AgeGrid(1.0, n_points)), pairs, seed, ordered, jobs)
      .to_json()
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lotka-Sharpe operators, chemostat control and robustness certificates";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<SetpointError>(m, "SetpointError", PyExc_ValueError);
  py::register_exception<BlowupError>(m, "BlowupError", PyExc_RuntimeError);
  py::register_exception<ExtinctionError>(m, "ExtinctionError", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<CertificateError>(m, "CertificateError", PyExc_RuntimeError);

  m.def("solve", &solve, py::arg("max_age"), py::arg("k"), py::arg("mu"));
  m.def("ls_integral",
        [](double max_age, const std::vector<double>& k, const std::vector<double>& mu, double zeta) {
          return ls_integral(profile(max_age, k), profile(max_age, mu), zeta);
        },
        py::arg("max_age"), py::arg("k"), py::arg("mu"), py::arg("zeta"));
  m.def("net_reproduction_number",
        [](double max_age, const std::vector<double>& k, const std::vector<double>& mu) {
          return net_reproduction_number(profile(max_age, k), profile(max_age, mu));
        },
        py::arg("max_age"), py::arg("k"), py::arg("mu"));
  m.def("family", &family, py::arg("seed"), py::arg("index"), py::arg("max_age") = 1.0, py::arg("n_points") = 201);
  m.def("equilibrium", &equilibrium, py::arg("config") = "");
  m.def("simulate", &simulate, py::arg("config") = "", py::call_guard<py::gil_scoped_release>());
  m.def("robustness", &robustness, py::arg("config"), py::arg("deltas"), py::arg("n_ic") = 20, py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("dataset", &dataset, py::arg("n"), py::arg("seed"), py::arg("max_age") = 1.0, py::arg("n_points") = 201,
        py::arg("jobs") = 1, py::arg("out") = "", py::call_guard<py::gil_scoped_release>());
  m.def("audit_surrogate", &audit_surrogate, py::arg("model") = "exact", py::arg("dataset") = "",
        py::arg("n") = 100, py::arg("test_seed") = 2, py::arg("delta") = 0.05,
        py::call_guard<py::gil_scoped_release>());
  m.def("audit_lipschitz", &audit_lipschitz, py::arg("pairs") = 1000, py::arg("ordered") = 100, py::arg("seed") = 1,
        py::arg("n_points") = 201, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("surrogate_forward",
        [](const std::string& path, const std::vector<double>& input) { return SurrogateModel::load(path).forward(input); },
        py::arg("path"), py::arg("input"));
  m.def("surrogate_predict",
        [](const std::string& path, double max_age, const std::vector<double>& k, const std::vector<double>& mu) {
          return SurrogateModel::load(path)(profile(max_age, k), profile(max_age, mu));
        },
        py::arg("path"), py::arg("max_age"), py::arg("k"), py::arg("mu"));
  m.def("encode_doubles", [](const std::vector<double>& v) { return encode_doubles(v); });
  m.def("decode_doubles", &decode_doubles);
  m.def("default_config", [] { return RunConfig{}.to_json().dump(); });
}
