// Runs the lsctl executable as a subprocess.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kData = LSCTL_TEST_DATA;

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("lsctl_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const fs::path o = scratch_dir() / "stdout.txt", e = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + LSCTL_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" +
                          e.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string at(const std::string& name) { return (scratch_dir() / name).string(); }

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("solve: constant case") {
  const Result r = run("solve --k " + kData + "/constant_k.json --mu " + kData + "/constant_mu.json --oracle");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j.at("zeta").get<double>() - 1.0) <= 1e-6);
  CHECK(j.at("residual").get<double>() <= 1e-10);
  CHECK(j.at("bounds").at("lower").get<double>() <= j.at("zeta").get<double>());
  CHECK(j.at("bounds").at("upper").get<double>() >= j.at("zeta").get<double>());
  CHECK(j.at("pi0").at("at_0").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(j.at("oracle").at("discrepancy").get<double>() <= 1e-6);
  CHECK(j.at("grid").at("n_points").get<int>() == 4001);
}

TEST_CASE("solve: R0 <= 1 exits 2 with a JSON error") {
  const Result r = run("solve --k " + kData + "/subcritical_k.json --mu " + kData + "/subcritical_mu.json");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  const json e = json::parse(r.err);
  CHECK(e.at("error") == "DomainError");
  CHECK(e.at("exit_code") == 2);
  CHECK(e.at("message").get<std::string>().find("not in set B") != std::string::npos);
}

TEST_CASE("usage and input errors") {
  CHECK(run("solve --nope 3").code == 1);
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);

  std::ofstream(at("broken.json")) << "{\"max_age\": 1, \"values\": [1, 2";
  const Result r = run("solve --k " + at("broken.json") + " --mu " + kData + "/constant_mu.json");
  CHECK(r.code == 6);
  CHECK(json::parse(r.err).at("error") == "ShapeError");
}

TEST_CASE("solve: family draw matches between runs") {
  const Result a = run("solve --sample-seed 1 --sample-index 2");
  const Result b = run("solve --sample-seed 1 --sample-index 2");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out).at("zeta").get<double>() > 0.0);
}

TEST_CASE("dataset: 1000 records, byte-identical across jobs") {
  const Result a = run("dataset --n 1000 --seed 1 --out " + at("d1.jsonl"));
  REQUIRE(a.code == 0);
  const std::string body = slurp(at("d1.jsonl"));
  CHECK(count_lines(body) == 1000);
  CHECK(fs::exists(at("d1.manifest.json")));
  const json first = json::parse(body.substr(0, body.find('\n')));
  CHECK(first.at("r0").get<double>() > 1.2);

  const Result b = run("dataset --n 1000 --seed 1 --jobs 4 --out " + at("d2.jsonl"));
  REQUIRE(b.code == 0);
  CHECK(slurp(at("d2.jsonl")) == body);
}

TEST_CASE("simulate: nonnegative dilution and deterministic output") {
  const std::string common = "simulate --config " + kData + "/reference.json --horizon 5 --out ";
  const Result a = run(common + at("sim1"));
  REQUIRE(a.code == 0);
  const json s = json::parse(slurp(at("sim1/summary.json")));
  CHECK(s.at("min_u").get<double>() >= 0.0);
  CHECK(fs::exists(at("sim1/trajectory.csv")));
  CHECK(fs::exists(at("sim1/manifest.json")));

  std::istringstream csv(slurp(at("sim1/trajectory.csv")));
  std::string line;
  std::getline(csv, line);
  std::size_t u_col = 0, col = 0;
  for (std::size_t p = 0, q; p <= line.size(); p = q + 1, ++col) {
    q = line.find(',', p);
    if (q == std::string::npos) q = line.size();
    if (line.substr(p, q - p) == "u") u_col = col;
  }
  REQUIRE(u_col > 0);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t c = 0; c <= u_col; ++c) std::getline(ls, cell, ',');
    CHECK(std::stod(cell) >= 0.0);
    ++rows;
  }
  CHECK(rows > 10);

  REQUIRE(run(common + at("sim2")).code == 0);
  CHECK(slurp(at("sim1/trajectory.csv")) == slurp(at("sim2/trajectory.csv")));
}

TEST_CASE("simulate: unrealizable setpoint exits 4 and writes nothing") {
  const Result r = run("simulate --u-star 50 --out " + at("sim_bad"));
  CHECK(r.code == 4);
  CHECK(json::parse(r.err).at("error") == "SetpointError");
  CHECK_FALSE(fs::exists(at("sim_bad")));
}

TEST_CASE("adaptive: a broken model file leaves no partial output") {
  std::ofstream(at("bad.model.json")) << "{\"format\": \"lsctl-dense\", \"version\": \"v1\"}";
  const Result r = run("adaptive --horizon 1 --surrogate " + at("bad.model.json") + " --out " + at("adapt_bad"));
  CHECK(r.code == 6);
  CHECK_FALSE(fs::exists(at("adapt_bad")));

  fs::create_directories(at("keep"));
  std::ofstream(at("keep/mine.txt")) << "x";
  CHECK(run("adaptive --horizon 1 --surrogate " + at("bad.model.json") + " --out " + at("keep")).code == 6);
  CHECK(fs::exists(at("keep/mine.txt")));
}

TEST_CASE("robustness: certified level at delta = 0.02") {
  const Result r = run("robustness --delta 0.02 --n-ic 4 --horizon 30 --out " + at("rob"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("certified=yes") != std::string::npos);
  const json c = json::parse(slurp(at("rob/certificates.json")));
  REQUIRE(c.size() == 1);
  CHECK(c[0].at("c_star_delta").get<double>() > 0.0);
  CHECK(c[0].at("certified").get<bool>());
}

TEST_CASE("audit-surrogate with the exact solver") {
  const Result r = run("audit-surrogate --model exact --n 20 --delta 0.01");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("delta_hat").get<double>() <= 2e-10);
  CHECK(j.at("certified").get<bool>());
}

TEST_CASE("audit-surrogate with the golden model") {
  const Result r = run("audit-surrogate --model " + kData + "/golden.model.json --n 10 --delta 0.01");
  REQUIRE(r.code == 0);
  CHECK_FALSE(json::parse(r.out).at("certified").get<bool>());
}

TEST_CASE("audit-lipschitz passes on a small run") {
  const Result r = run("audit-lipschitz --pairs 50 --ordered 10 --seed 3");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("passed").get<bool>());
}

TEST_CASE("cleanup") { fs::remove_all(scratch_dir()); }
