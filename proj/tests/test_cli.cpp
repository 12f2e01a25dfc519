#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qhdyn/scenario.hpp"
#include "qhdyn/weylq.hpp"

using namespace qhdyn;
namespace fs = std::filesystem;

namespace {

const char* kHarmonicLoop = R"({
  "version": 1,
  "n": 1,
  "hamiltonian": {"kind": "harmonic"},
  "time": {"t0": 0, "t1": 6.283185307179586, "nodes": 65},
  "initial_state": {"z": [0.5, -0.25]},
  "outputs": {"flow": true, "state-path": true, "index": true, "symbol": true,
              "matrix-elements": [{"z": [0, 0], "X": [0.5, 0]}]}
})";

const char* kFreeWigner = R"({
  "version": 1,
  "hamiltonian": {"kind": "free"},
  "time": {"t1": 1.0},
  "outputs": {"wigner": {"extent": 3, "points": 31}}
})";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qhdyn_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> last_csv_row(const fs::path& p) {
  std::ifstream in(p);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') last = line;
  std::vector<double> row;
  std::stringstream ss(last);
  std::string cell;
  while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
  return row;
}

int run_cli(const std::string& args, const fs::path& out) {
  std::string cmd = std::string(QHDYN_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("scenario round trip through serialization") {
  Scenario s = parse_scenario(kHarmonicLoop);
  CHECK(s.kind == "harmonic");
  CHECK(s.outputs.matrix_elements.size() == 1);
  Scenario t = parse_scenario(serialize(s).dump());
  CHECK(serialize(t) == serialize(s));
}

TEST_CASE("piecewise and constant Hamiltonians parse") {
  Scenario s = parse_scenario(R"({"version": 1, "hamiltonian": {"kind": "piecewise", "pieces": [
    {"start": 0, "G": [[1]], "L": [[0]], "K": [[1]]},
    {"start": 1, "G": [[0]], "L": [[0]], "K": [[1]]}]}, "time": {"t1": 2}})");
  CHECK(s.pieces.size() == 2);
  CHECK((flow(s.hamiltonian(), 0, 2).back() - (Mat(2, 2) << 1, 1, 0, 1).finished() * rotation(1)).norm() <
        1e-10);
  Scenario c = parse_scenario(R"({"version": 1, "hamiltonian": {"kind": "constant",
    "G": [[1]], "L": [[0.2]], "K": [[0.5]]}, "time": {"t1": 1}})");
  CHECK(c.blocks.L(0, 0) == 0.2);
  for (const Scenario& x : {s, c}) CHECK(serialize(parse_scenario(serialize(x).dump())) == serialize(x));
}

TEST_CASE("configuration errors name the field and line") {
  try {
    parse_scenario("{\n  \"version\": 1,\n  \"hamiltonian\": {\"kind\": \"harmonic\"},\n"
                   "  \"time\": {\"t1\": 1, \"steps\": 4}\n}");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    std::string m = e.what();
    CHECK(m.find("time.steps") != std::string::npos);
    CHECK(m.find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario(R"({"hamiltonian": {"kind": "harmonic"}, "time": {"t1": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"version": 2, "hamiltonian": {"kind": "harmonic"}, "time": {"t1": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"version": 1, "hamiltonian": {"kind": "constant",
    "G": [[1]], "L": [[0]], "K": [[1, 2]]}, "time": {"t1": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"version": 1, "hamiltonian": {"kind": "harmonic"},
    "time": {"t1": 1}, "initial_state": {"gamma_re": [[0]], "gamma_im": [[-1]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("{\"version\": 1,"), ConfigError);
}

TEST_CASE("symmetry tolerance is configurable") {
  const char* text = R"({"version": 1, "n": 2, "hamiltonian": {"kind": "constant",
    "G": [[1, 1e-10], [0, 1]], "L": [[0, 0], [0, 0]], "K": [[1, 0], [0, 1]]}, "time": {"t1": 1}})";
  CHECK_THROWS_AS(parse_scenario(text), ConfigError);
  Scenario s = parse_scenario(text, Tolerances{.symplectic = 1e-9, .symmetry = 1e-8});
  CHECK(s.blocks.G(0, 1) == s.blocks.G(1, 0));
  CHECK_NOTHROW(s.hamiltonian());
}

TEST_CASE("oscillator loop: centre returns and the phase is −1") {
  TempDir dir("loop");
  RunReport rep = run_scenario(parse_scenario(kHarmonicLoop), dir.path);
  CHECK(rep.pass);
  std::vector<double> row = last_csv_row(dir.path / "state_path.csv");
  REQUIRE(row.size() == 9);
  CHECK(row[1] == doctest::Approx(0.5));
  CHECK(row[2] == doctest::Approx(-0.25));
  CHECK(std::abs(row[3]) < 1e-10);
  CHECK(row[4] == doctest::Approx(1.0));
  CHECK(row[7] == doctest::Approx(-1.0));
  CHECK(std::abs(row[8]) < 1e-10);
  json idx = json::parse(slurp(dir.path / "index.json"));
  CHECK(idx["nu"].get<double>() == 1.0);
  json me = json::parse(slurp(dir.path / "matrix_elements.json"));
  CHECK(me[0]["re"].get<double>() == doctest::Approx(-std::exp(-0.0625)));
  for (const char* f : {"flow.csv", "winding.csv", "symbol.json", "manifest.json"})
    CHECK(fs::exists(dir.path / f));
}

TEST_CASE("free-particle Wigner slice") {
  TempDir dir("wigner");
  run_scenario(parse_scenario(kFreeWigner), dir.path);
  std::ifstream in(dir.path / "wigner.csv");
  std::string line;
  int rows = 0;
  double peak = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || !std::isdigit(line.back())) continue;
    std::stringstream ss(line);
    std::string q, p, w;
    std::getline(ss, q, ',');
    std::getline(ss, p, ',');
    std::getline(ss, w, ',');
    double qv = std::stod(q), pv = std::stod(p), wv = std::stod(w);
    // W_t(q, p) = W_0(q − t p, p) = 2 exp(−(q − p)² − p²)
    CHECK(wv == doctest::Approx(2 * std::exp(-(qv - pv) * (qv - pv) - pv * pv)).epsilon(1e-9));
    peak = std::max(peak, wv);
    ++rows;
  }
  CHECK(rows == 31 * 31);
  CHECK(peak == doctest::Approx(2.0));
}

TEST_CASE("empty outputs give only the manifest") {
  TempDir dir("empty");
  RunReport rep = run_scenario(parse_scenario(R"({"version": 1, "hamiltonian": {"kind": "harmonic"},
    "time": {"t1": 1}})"),
                               dir.path);
  CHECK(rep.manifest["files"].empty());
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);
}

TEST_CASE("reruns are byte-identical") {
  TempDir a("rerun_a"), b("rerun_b");
  Scenario s = parse_scenario(kHarmonicLoop);
  run_scenario(s, a.path);
  run_scenario(s, b.path);
  for (const char* f : {"flow.csv", "state_path.csv", "index.json", "winding.csv", "symbol.json",
                        "matrix_elements.json", "manifest.json"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));
}

TEST_CASE("wavefunction CSV round trip") {
  Grid g{1, 32, 8.0};
  GridWavefunction psi = sample(GaussianState::coherent((Vec(2) << 0.3, 0.7).finished()), g);
  std::stringstream ss;
  write_wavefunction_csv(ss, psi);
  GridWavefunction back = read_wavefunction_csv(ss);
  CHECK(back.grid.N == 32);
  CHECK(back.grid.L == 8.0);
  CHECK(back.psi == psi.psi);
}

TEST_CASE("command-line binary") {
  TempDir dir("cli");
  fs::path log = dir.path / "log.txt";
  CHECK(run_cli("verify --only 1", log) == 0);
  CHECK(slurp(log).find("PASS  1") != std::string::npos);
  CHECK(run_cli("verify --only 1 --mutate-principal-branch", log) == 1);
  CHECK(slurp(log).find("failed: ho-exactness") != std::string::npos);
  CHECK(run_cli("--schema", log) == 0);
  CHECK(slurp(log).find("state_path.csv") != std::string::npos);

  fs::path cfg = dir.path / "loop.json";
  std::ofstream(cfg) << kHarmonicLoop;
  CHECK(run_cli("index " + cfg.string(), log) == 0);
  CHECK(json::parse(slurp(log))["nu"].get<double>() == 1.0);
  CHECK(run_cli("run " + cfg.string() + " -o " + (dir.path / "out").string(), log) == 0);
  CHECK(fs::exists(dir.path / "out" / "manifest.json"));

  fs::path bad = dir.path / "bad.json";
  std::ofstream(bad) << R"({"version": 1, "hamiltonian": {"kind": "quartic"}, "time": {"t1": 1}})";
  CHECK(run_cli("run " + bad.string() + " -o " + (dir.path / "bad").string(), log) == 2);
}
