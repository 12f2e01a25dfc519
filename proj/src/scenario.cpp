#include "qhdyn/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qhdyn/checks.hpp"

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

// Tracks the document text so that field errors can report a line.
class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    std::string key = field.substr(field.find_last_of('.') + 1);
    key = key.substr(0, key.find('['));
    std::ostringstream msg;
    int line = line_of("\"" + key + "\"");
    if (line > 0) msg << "line " << line << ", ";
    msg << "field '" << field << "': " << what;
    throw ConfigError(msg.str());
  }

  void only_keys(const json& j, const std::string& field, std::set<std::string> allowed) const {
    if (!j.is_object()) fail(field, "expected an object");
    for (const auto& [k, v] : j.items())
      if (!allowed.count(k)) fail(field.empty() ? k : field + "." + k, "unknown key");
  }

  double number(const json& j, const std::string& field) const {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
  }

  int integer(const json& j, const std::string& field) const {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    return j.get<int>();
  }

  bool boolean(const json& j, const std::string& field) const {
    if (!j.is_boolean()) fail(field, "expected true or false");
    return j.get<bool>();
  }

  Mat matrix(const json& j, const std::string& field, Eigen::Index rows, Eigen::Index cols) const {
    Mat A;
    try {
      A = matrix_from_json(j, field);
    } catch (const std::invalid_argument& e) {
      fail(field, e.what());
    }
    if (A.rows() != rows || A.cols() != cols)
      fail(field, "expected " + std::to_string(rows) + "×" + std::to_string(cols));
    return A;
  }

  Vec vector(const json& j, const std::string& field, Eigen::Index size) const {
    Vec v;
    try {
      v = vector_from_json(j, field);
    } catch (const std::invalid_argument& e) {
      fail(field, e.what());
    }
    if (v.size() != size) fail(field, "expected " + std::to_string(size) + " entries");
    return v;
  }

 private:
  int line_of(const std::string& needle) const {
    auto pos = text_.find(needle);
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + pos, '\n'));
  }
  const std::string& text_;
};

HamiltonianBlocks read_blocks(const Reader& r, const json& j, const std::string& field, int n,
                              double sym_tol, std::set<std::string> extra = {}) {
  std::set<std::string> keys{"G", "L", "K"};
  keys.insert(extra.begin(), extra.end());
  r.only_keys(j, field, keys);
  HamiltonianBlocks b;
  for (const char* k : {"G", "L", "K"})
    if (!j.contains(k)) r.fail(field + "." + k, "missing");
  b.G = r.matrix(j["G"], field + ".G", n, n);
  b.L = r.matrix(j["L"], field + ".L", n, n);
  b.K = r.matrix(j["K"], field + ".K", n, n);
  try {
    validate_blocks(b, n, sym_tol);
  } catch (const std::invalid_argument& e) {
    r.fail(field, e.what());
  }
  b.G = symmetrize(b.G);
  b.K = symmetrize(b.K);
  return b;
}

json blocks_json(const HamiltonianBlocks& b) {
  return json{{"G", matrix_to_json(b.G)}, {"L", matrix_to_json(b.L)}, {"K", matrix_to_json(b.K)}};
}

}  // namespace

QuadraticHamiltonian Scenario::hamiltonian() const {
  if (kind == "harmonic") return QuadraticHamiltonian::harmonic(n, hbar);
  if (kind == "free") return QuadraticHamiltonian::free_particle(n, hbar);
  if (kind == "inverted") return QuadraticHamiltonian::inverted(n, hbar);
  if (kind == "constant") return QuadraticHamiltonian::constant(blocks.G, blocks.L, blocks.K, hbar);
  if (kind == "piecewise") return QuadraticHamiltonian::piecewise(starts, pieces, hbar);
  throw std::invalid_argument("unknown Hamiltonian kind " + kind);
}

GaussianState Scenario::initial_state() const {
  if (gamma) return GaussianState::squeezed(z, *gamma, hbar);
  return GaussianState::coherent(z, hbar);
}

Scenario parse_scenario(const std::string& text, const Tolerances& tol) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1 + static_cast<int>(std::count(
                       text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
    throw ConfigError("line " + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
  Reader r(text);
  r.only_keys(doc, "", {"version", "n", "hbar", "hamiltonian", "time", "initial_state", "outputs"});
  Scenario s;
  if (!doc.contains("version")) r.fail("version", "missing");
  s.version = r.integer(doc["version"], "version");
  if (s.version != kScenarioVersion)
    r.fail("version", "unsupported version " + std::to_string(s.version));
  if (doc.contains("n")) s.n = r.integer(doc["n"], "n");
  if (s.n < 1 || s.n > 8) r.fail("n", "must be between 1 and 8");
  if (doc.contains("hbar")) s.hbar = r.number(doc["hbar"], "hbar");
  if (!(s.hbar > 0)) r.fail("hbar", "must be positive");

  if (!doc.contains("hamiltonian")) r.fail("hamiltonian", "missing");
  const json& h = doc["hamiltonian"];
  if (!h.is_object() || !h.contains("kind")) r.fail("hamiltonian.kind", "missing");
  if (!h["kind"].is_string()) r.fail("hamiltonian.kind", "expected a string");
  s.kind = h["kind"].get<std::string>();
  if (s.kind == "harmonic" || s.kind == "free" || s.kind == "inverted") {
    r.only_keys(h, "hamiltonian", {"kind"});
  } else if (s.kind == "constant") {
    s.blocks = read_blocks(r, h, "hamiltonian", s.n, tol.symmetry, {"kind"});
  } else if (s.kind == "piecewise") {
    r.only_keys(h, "hamiltonian", {"kind", "pieces"});
    if (!h.contains("pieces") || !h["pieces"].is_array() || h["pieces"].empty())
      r.fail("hamiltonian.pieces", "expected a non-empty array");
    for (std::size_t k = 0; k < h["pieces"].size(); ++k) {
      std::string f = "hamiltonian.pieces[" + std::to_string(k) + "]";
      const json& p = h["pieces"][k];
      s.pieces.push_back(read_blocks(r, p, f, s.n, tol.symmetry, {"start"}));
      if (!p.contains("start")) r.fail(f + ".start", "missing");
      s.starts.push_back(r.number(p["start"], f + ".start"));
      if (k > 0 && !(s.starts[k] > s.starts[k - 1]))
        r.fail(f + ".start", "start times must increase strictly");
    }
  } else {
    r.fail("hamiltonian.kind", "expected harmonic, free, inverted, constant or piecewise");
  }

  if (!doc.contains("time")) r.fail("time", "missing");
  const json& t = doc["time"];
  r.only_keys(t, "time", {"t0", "t1", "nodes"});
  if (t.contains("t0")) s.t0 = r.number(t["t0"], "time.t0");
  if (!t.contains("t1")) r.fail("time.t1", "missing");
  s.t1 = r.number(t["t1"], "time.t1");
  if (!(s.t1 > s.t0)) r.fail("time.t1", "must exceed t0");
  if (t.contains("nodes")) s.nodes = r.integer(t["nodes"], "time.nodes");
  if (s.nodes < 2 || s.nodes > 100000) r.fail("time.nodes", "must be between 2 and 100000");

  s.z = Vec::Zero(2 * s.n);
  if (doc.contains("initial_state")) {
    const json& st = doc["initial_state"];
    r.only_keys(st, "initial_state", {"z", "gamma_re", "gamma_im"});
    if (st.contains("z")) s.z = r.vector(st["z"], "initial_state.z", 2 * s.n);
    if (st.contains("gamma_re") != st.contains("gamma_im"))
      r.fail("initial_state.gamma_im", "gamma_re and gamma_im must be given together");
    if (st.contains("gamma_re")) {
      Mat gr = r.matrix(st["gamma_re"], "initial_state.gamma_re", s.n, s.n);
      Mat gi = r.matrix(st["gamma_im"], "initial_state.gamma_im", s.n, s.n);
      CMat g = gr.cast<cplx>() + I1 * gi.cast<cplx>();
      if (!verify_siegel(g).pass)
        r.fail("initial_state.gamma_im", "Γ must be symmetric with positive definite imaginary part");
      s.gamma = g;
    }
  }

  if (doc.contains("outputs")) {
    const json& o = doc["outputs"];
    r.only_keys(o, "outputs",
                {"flow", "state-path", "wigner", "symbol", "index", "matrix-elements", "verify"});
    if (o.contains("flow")) s.outputs.flow = r.boolean(o["flow"], "outputs.flow");
    if (o.contains("state-path"))
      s.outputs.state_path = r.boolean(o["state-path"], "outputs.state-path");
    if (o.contains("symbol")) s.outputs.symbol = r.boolean(o["symbol"], "outputs.symbol");
    if (o.contains("index")) s.outputs.index = r.boolean(o["index"], "outputs.index");
    if (o.contains("wigner")) {
      const json& w = o["wigner"];
      r.only_keys(w, "outputs.wigner", {"extent", "points"});
      WignerRequest wr;
      if (w.contains("extent")) wr.extent = r.number(w["extent"], "outputs.wigner.extent");
      if (w.contains("points")) wr.points = r.integer(w["points"], "outputs.wigner.points");
      if (!(wr.extent > 0)) r.fail("outputs.wigner.extent", "must be positive");
      if (wr.points < 2 || wr.points > 2001) r.fail("outputs.wigner.points", "must be in [2, 2001]");
      s.outputs.wigner = wr;
    }
    if (o.contains("matrix-elements")) {
      const json& m = o["matrix-elements"];
      if (!m.is_array()) r.fail("outputs.matrix-elements", "expected an array");
      for (std::size_t k = 0; k < m.size(); ++k) {
        std::string f = "outputs.matrix-elements[" + std::to_string(k) + "]";
        r.only_keys(m[k], f, {"z", "X"});
        if (!m[k].contains("z") || !m[k].contains("X")) r.fail(f, "needs z and X");
        s.outputs.matrix_elements.push_back(
            {r.vector(m[k]["z"], f + ".z", 2 * s.n), r.vector(m[k]["X"], f + ".X", 2 * s.n)});
      }
    }
    if (o.contains("verify")) {
      if (!o["verify"].is_string()) r.fail("outputs.verify", "expected \"quick\" or \"full\"");
      s.outputs.verify = o["verify"].get<std::string>();
      if (s.outputs.verify != "quick" && s.outputs.verify != "full")
        r.fail("outputs.verify", "expected \"quick\" or \"full\"");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file, const Tolerances& tol) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), tol);
}

json serialize(const Scenario& s) {
  json h{{"kind", s.kind}};
  if (s.kind == "constant") {
    json b = blocks_json(s.blocks);
    for (auto& [k, v] : b.items()) h[k] = v;
  } else if (s.kind == "piecewise") {
    json pieces = json::array();
    for (std::size_t k = 0; k < s.pieces.size(); ++k) {
      json p{{"start", s.starts[k]}};
      json b = blocks_json(s.pieces[k]);
      for (auto& [key, v] : b.items()) p[key] = v;
      pieces.push_back(p);
    }
    h["pieces"] = pieces;
  }
  json st{{"z", vector_to_json(s.z)}};
  if (s.gamma) {
    st["gamma_re"] = matrix_to_json(s.gamma->real());
    st["gamma_im"] = matrix_to_json(s.gamma->imag());
  }
  json o{{"flow", s.outputs.flow},
         {"state-path", s.outputs.state_path},
         {"symbol", s.outputs.symbol},
         {"index", s.outputs.index}};
  if (s.outputs.wigner)
    o["wigner"] = {{"extent", s.outputs.wigner->extent}, {"points", s.outputs.wigner->points}};
  json me = json::array();
  for (const auto& m : s.outputs.matrix_elements)
    me.push_back({{"z", vector_to_json(m.z)}, {"X", vector_to_json(m.X)}});
  o["matrix-elements"] = me;
  if (!s.outputs.verify.empty()) o["verify"] = s.outputs.verify;
  return json{{"version", s.version},
              {"n", s.n},
              {"hbar", s.hbar},
              {"hamiltonian", h},
              {"time", {{"t0", s.t0}, {"t1", s.t1}, {"nodes", s.nodes}}},
              {"initial_state", st},
              {"outputs", o}};
}

namespace {

SymplecticPath scenario_flow(const Scenario& s) {
  FlowOptions fo;
  fo.nodes = s.nodes;
  return flow(s.hamiltonian(), s.t0, s.t1, fo);
}

bool near_eigenvalue_one(const Mat& F) {
  const Eigen::Index d = F.rows();
  Eigen::JacobiSVD<Mat> svd(Mat(Mat::Identity(d, d) - F));
  return svd.singularValues().minCoeff() <= 1e-8 * std::max(1.0, inf_norm(F));
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

json check_entry(const std::string& name, bool pass, double value, double tol) {
  return json{{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tol}};
}

}  // namespace

json index_report(const Scenario& s) { return to_json(cz_index(scenario_flow(s))); }

json symbol_report(const Scenario& s) {
  SymplecticPath path = scenario_flow(s);
  const Mat& F = path.back();
  const int n = s.n;
  json out{{"F", matrix_to_json(F)}};
  MetaplecticBranch b = metaplectic_branch(path);
  out["branch"] = {{"d_re", b.d.real()}, {"d_im", b.d.imag()}, {"arg_d", b.arg_d}};
  double dp = Mat(Mat::Identity(2 * n, 2 * n) + F).determinant();
  if (std::abs(dp) > 1e-10) {
    IndexResult idx = cz_index(path);
    out["contravariant"] = to_json(mw_contravariant(F, idx.nu));
  } else {
    out["contravariant"] = nullptr;
  }
  if (near_eigenvalue_one(F)) {
    DegenerateReport rep;
    out["covariant"] = to_json(degenerate_covariant(b, &rep));
    out["degenerate"] = {{"eigenspace_dim", rep.eigenspace_dim},
                         {"dirac_dim", rep.dirac_dim},
                         {"signature_Q", rep.signature_Q},
                         {"convergence", rep.convergence}};
  } else {
    out["covariant"] = to_json(covariant_symbol(b));
  }
  return out;
}

RunReport run_scenario(const Scenario& s, const std::filesystem::path& outdir,
                       const Tolerances& tol) {
  std::filesystem::create_directories(outdir);
  RunReport rep;
  json files = json::array();
  json checks = json::array();
  json tolerances{{"symplectic_residual", tol.symplectic}, {"input_symmetry", tol.symmetry},
                  {"siegel_min_imag_eigenvalue", 1e-12},
                  {"norm_drift", 1e-10}};
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(outdir / name, content);
    files.push_back(name);
  };
  auto add_check = [&](const std::string& name, bool pass, double value, double tol) {
    checks.push_back(check_entry(name, pass, value, tol));
    rep.pass = rep.pass && pass;
  };

  const OutputRequest& o = s.outputs;
  bool need_path = o.flow || o.state_path || o.wigner || o.symbol || o.index ||
                   !o.matrix_elements.empty();
  std::optional<SymplecticPath> path;
  if (need_path) path = scenario_flow(s);

  if (o.flow) {
    std::ostringstream os;
    write_path_csv(os, *path);
    emit("flow.csv", os.str());
    double worst = 0;
    for (const Mat& F : path->matrices())
      worst = std::max(worst, symplectic_residual(F) / std::max(1.0, inf_norm(F) * inf_norm(F)));
    add_check("flow-symplectic", worst <= tol.symplectic, worst, tol.symplectic);
  }
  if (o.state_path || o.wigner) {
    GaussianState s0 = s.initial_state();
    std::vector<GaussianState> states = propagate(*path, s0);
    if (o.state_path) {
      std::ostringstream os;
      write_state_path_csv(os, path->times(), states);
      emit("state_path.csv", os.str());
      double min_eig = 1e300, drift = 0;
      for (const GaussianState& st : states) {
        min_eig = std::min(min_eig, verify_siegel(st.gamma).min_imag_eigenvalue);
        drift = std::max(drift, std::abs(st.norm() - s0.norm()));
      }
      add_check("state-siegel", min_eig > 1e-12, min_eig, 1e-12);
      add_check("state-norm", drift <= 1e-10, drift, 1e-10);
    }
    if (o.wigner) {
      std::ostringstream os;
      write_wigner_csv(os, states.back(), o.wigner->extent, o.wigner->points);
      emit("wigner.csv", os.str());
    }
  }
  if (o.index) {
    IndexResult idx = cz_index(*path);
    emit("index.json", to_json(idx).dump(2) + "\n");
    std::ostringstream os;
    write_winding_csv(os, idx);
    emit("winding.csv", os.str());
    add_check("index-parity", idx.half_integer == (idx.det_one_plus_F < 0), idx.nu, 0.0);
  }
  if (o.symbol) emit("symbol.json", symbol_report(s).dump(2) + "\n");
  if (!o.matrix_elements.empty()) {
    // ħ = 1 units: phase-space points are rescaled by ħ^{−1/2}.
    MetaplecticBranch b = metaplectic_branch(*path);
    const double scale = 1.0 / std::sqrt(s.hbar);
    json rows = json::array();
    for (const auto& m : o.matrix_elements) {
      cplx v = matrix_element(b, Vec(m.z * scale), Vec(m.X * scale));
      rows.push_back({{"z", vector_to_json(m.z)}, {"X", vector_to_json(m.X)},
                      {"re", v.real()}, {"im", v.imag()}});
    }
    emit("matrix_elements.json", rows.dump(2) + "\n");
  }
  if (!o.verify.empty()) {
    CheckOptions co;
    co.full = o.verify == "full";
    for (const CheckResult& c : run_checks(co)) {
      json e = to_json(c);
      checks.push_back(e);
      rep.pass = rep.pass && c.pass;
    }
  }
  rep.manifest = json{{"version", kScenarioVersion},
                      {"config", serialize(s)},
                      {"files", files},
                      {"tolerances", tolerances},
                      {"checks", checks},
                      {"status", rep.pass ? "pass" : "fail"}};
  write_file(outdir / "manifest.json", rep.manifest.dump(2) + "\n");
  return rep;
}

}  // namespace qhdyn
