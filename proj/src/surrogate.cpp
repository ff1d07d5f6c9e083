#include "lsctl/surrogate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "lsctl/errors.hpp"
#include "lsctl/operators.hpp"
#include "lsctl/parallel.hpp"

namespace lsctl {

namespace {

namespace bai = boost::archive::iterators;

std::vector<double> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ShapeError(std::string("record: missing array '") + key + "'");
  std::vector<double> v;
  v.reserve(j.at(key).size());
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ShapeError(std::string("record: non-numeric entry in '") + key + "'");
    v.push_back(x.get<double>());
  }
  return v;
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ShapeError(std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

std::uint64_t swap_if_big_endian(std::uint64_t u) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((u >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return u;
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::gelu:
      return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    case Activation::identity:
      break;
  }
  return x;
}

}  // namespace

json DatasetRecord::to_json() const {
  return json{{"a_grid", {{"max_age", grid.max_age}, {"n_points", grid.n_points}}},
              {"k", k},
              {"mu", mu},
              {"g", g},
              {"zeta", zeta},
              {"r0", r0},
              {"index", index},
              {"params", params.to_json()}};
}

DatasetRecord DatasetRecord::from_json(const json& j) {
  if (!j.is_object() || !j.contains("a_grid")) throw ShapeError("record: missing 'a_grid'");
  const json& ag = j.at("a_grid");
  DatasetRecord r;
  const double n_points = number(ag, "n_points");
  if (n_points < 3 || n_points != std::floor(n_points)) throw ShapeError("record: bad n_points");
  r.grid = AgeGrid(number(ag, "max_age"), static_cast<std::size_t>(n_points));
  r.k = number_array(j, "k");
  r.mu = number_array(j, "mu");
  r.g = number_array(j, "g");
  for (const auto* v : {&r.k, &r.mu, &r.g}) {
    if (v->size() != r.grid.n_points) throw ShapeError("record: profile length does not match a_grid");
  }
  r.zeta = number(j, "zeta");
  r.r0 = number(j, "r0");
  if (j.contains("index")) r.index = j.at("index").get<std::uint64_t>();
  if (j.contains("params")) r.params = FamilyParams::from_json(j.at("params"));
  return r;
}

Dataset generate_dataset(std::size_t n, std::uint64_t seed, const AgeGrid& grid, unsigned jobs) {
  if (n == 0) throw DomainError("generate_dataset: n must be at least 1");
  struct Draw {
    bool accepted = false;
    DatasetRecord rec;
  };
  Dataset out;
  out.records.reserve(n);
  std::uint64_t next = 0;
  while (out.records.size() < n) {
    const std::size_t batch = std::max<std::size_t>(64, 2 * (n - out.records.size()));
    std::vector<Draw> draws(batch);
    parallel_for(batch, jobs, [&](std::size_t i) {
      Draw& d = draws[i];
      d.rec.index = next + i;
      Rng rng = Rng::stream(seed, d.rec.index);
      d.rec.params = FamilyParams::sample(rng);
      const FamilySample s = sample_family(d.rec.params, grid);
      d.rec.r0 = net_reproduction_number(s.k, s.mu);
      if (!(d.rec.r0 > kDatasetR0Min)) return;
      d.accepted = true;
      d.rec.grid = grid;
      d.rec.zeta = g_ls(s.k, s.mu).zeta;
      d.rec.k = s.k.vector();
      d.rec.mu = s.mu.vector();
      d.rec.g = s.g.vector();
    });
    for (auto& d : draws) {
      ++out.candidates;
      if (d.accepted) out.records.push_back(std::move(d.rec));
      if (out.records.size() == n) break;
    }
    next += batch;
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : records) out << r.to_json().dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<DatasetRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(DatasetRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ShapeError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ShapeError& e) {
      throw ShapeError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::gelu:
      return "gelu";
    case Activation::identity:
      break;
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "gelu") return Activation::gelu;
  if (s == "identity") return Activation::identity;
  throw ShapeError("unknown activation '" + s + "'");
}

std::string encode_doubles(std::span<const double> v) {
  std::string bytes(v.size() * 8, '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint64_t u = swap_if_big_endian(std::bit_cast<std::uint64_t>(v[i]));
    std::memcpy(bytes.data() + 8 * i, &u, 8);
  }
  using Enc = bai::base64_from_binary<bai::transform_width<std::string::const_iterator, 6, 8>>;
  std::string text(Enc(bytes.cbegin()), Enc(bytes.cend()));
  text.append((3 - bytes.size() % 3) % 3, '=');
  return text;
}

std::vector<double> decode_doubles(const std::string& text) {
  if (text.size() % 4 != 0) throw ShapeError("base64: length is not a multiple of 4");
  std::string s = text;
  std::size_t pad = 0;
  if (!s.empty() && s.back() == '=') pad = s.size() >= 2 && s[s.size() - 2] == '=' ? 2 : 1;
  for (std::size_t i = 0; i < pad; ++i) s[s.size() - 1 - i] = 'A';
  using Dec = bai::transform_width<bai::binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string bytes;
  try {
    bytes.assign(Dec(s.cbegin()), Dec(s.cend()));
  } catch (const std::exception&) {
    throw ShapeError("base64: invalid character");
  }
  bytes.resize(bytes.size() - pad);
  if (bytes.size() % 8 != 0) throw ShapeError("base64: payload is not a whole number of float64 values");
  std::vector<double> v(bytes.size() / 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t u = 0;
    std::memcpy(&u, bytes.data() + 8 * i, 8);
    v[i] = std::bit_cast<double>(swap_if_big_endian(u));
  }
  return v;
}

void SurrogateModel::validate() const {
  if (grid_size < 2) throw ShapeError("model: grid_size must be at least 2");
  if (!(max_age > 0.0)) throw ShapeError("model: max_age must be positive");
  if (layers.empty()) throw ShapeError("model: no layers");
  std::size_t width = 2 * grid_size;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& L = layers[l];
    const std::string where = "model: layer " + std::to_string(l);
    if (L.in != width) throw ShapeError(where + " expects " + std::to_string(L.in) + " inputs, gets " +
                                        std::to_string(width));
    if (L.out == 0) throw ShapeError(where + " has no outputs");
    if (L.weight.size() != L.in * L.out) throw ShapeError(where + " weight has the wrong size");
    if (L.bias.size() != L.out) throw ShapeError(where + " bias has the wrong size");
    width = L.out;
  }
  if (width != 1) throw ShapeError("model: last layer must have one output");
}

double SurrogateModel::forward(std::span<const double> input) const {
  if (input.size() != 2 * grid_size) {
    throw ShapeError("model: input has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(2 * grid_size));
  }
  std::vector<double> x(input.begin(), input.end()), y;
  for (const DenseLayer& L : layers) {
    if (L.in != x.size()) throw ShapeError("model: layer input width mismatch");
    y.assign(L.out, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      double acc = L.bias[o];
      const double* w = L.weight.data() + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * x[i];
      y[o] = activate(L.activation, acc);
    }
    x.swap(y);
  }
  if (x.size() != 1) throw ShapeError("model: output is not scalar");
  return x[0];
}

std::vector<double> SurrogateModel::features(const AgeProfile& k, const AgeProfile& mu) const {
  require_same_grid(k, mu, "surrogate features");
  if (std::abs(k.grid().max_age - max_age) > 1e-12 * max_age) {
    throw ShapeError("model: profiles live on [0, " + format_double(k.grid().max_age) + "], model expects [0, " +
                     format_double(max_age) + "]");
  }
  const AgeGrid target(max_age, grid_size);
  const AgeProfile kr = resample(k, target), mr = resample(mu, target);
  std::vector<double> f(kr.vector());
  f.insert(f.end(), mr.vector().begin(), mr.vector().end());
  return f;
}

json SurrogateModel::to_json() const {
  json ls = json::array();
  for (const DenseLayer& L : layers) {
    ls.push_back({{"in", L.in},
                  {"out", L.out},
                  {"activation", to_string(L.activation)},
                  {"weight", encode_doubles(L.weight)},
                  {"bias", encode_doubles(L.bias)}});
  }
  return json{{"format", "lsctl-dense"}, {"version", "v1"},  {"grid_size", grid_size},
              {"max_age", max_age},      {"layers", ls},     {"metadata", metadata}};
}

SurrogateModel SurrogateModel::from_json(const json& j) {
  try {
    if (j.value("format", "lsctl-dense") != "lsctl-dense") throw ShapeError("model: unsupported format (expected \"lsctl-dense\")");
    if (j.value("version", "") != "v1") throw ShapeError("model: unsupported version (expected \"v1\")");
    SurrogateModel m;
    m.grid_size = j.at("grid_size").get<std::size_t>();
    m.max_age = j.at("max_age").get<double>();
    for (const auto& l : j.at("layers")) {
      DenseLayer L;
      L.in = l.at("in").get<std::size_t>();
      L.out = l.at("out").get<std::size_t>();
      L.activation = activation_from_string(l.at("activation").get<std::string>());
      L.weight = decode_doubles(l.at("weight").get<std::string>());
      L.bias = decode_doubles(l.at("bias").get<std::string>());
      m.layers.push_back(std::move(L));
    }
    if (j.contains("metadata")) m.metadata = j.at("metadata");
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ShapeError(std::string("model: ") + e.what());
  }
}

SurrogateModel SurrogateModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ShapeError(path + ": " + e.what());
  }
  return from_json(j);
}

void SurrogateModel::save(const std::string& path) const {
  validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

ZetaEstimator as_estimator(const SurrogateModel& model) {
  model.validate();
  return [model](const AgeProfile& k, const AgeProfile& mu) { return model(k, mu); };
}

json ErrorBudgetReport::to_json() const {
  return json{{"n", n},
              {"max_abs_error", max_abs_error},
              {"mse", mse},
              {"delta_hat", delta_hat},
              {"delta", delta},
              {"certified", certified}};
}

ErrorBudgetReport error_budget_audit(const ZetaEstimator& model, const std::vector<DatasetRecord>& test_set,
                                     double delta) {
  if (test_set.empty()) throw DomainError("error_budget_audit: empty test set");
  ErrorBudgetReport rep;
  rep.delta = delta;
  for (const auto& r : test_set) {
    const double zh = model ? model(r.k_profile(), r.mu_profile()) : g_ls(r.k_profile(), r.mu_profile()).zeta;
    const double err = std::abs(zh - r.zeta);
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    rep.mse += err * err;
  }
  rep.n = test_set.size();
  rep.mse /= static_cast<double>(rep.n);
  rep.delta_hat = 2.0 * rep.max_abs_error;
  rep.certified = rep.delta_hat < delta;
  return rep;
}

}  // namespace lsctl
