#include "qhdyn/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace qhdyn {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json matrix_to_json(const Mat& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(field + ": expected a nested array");
  const std::size_t r = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw std::invalid_argument(field + "[0]: expected a row array");
  const std::size_t c = j[0].size();
  Mat A(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!j[i].is_array() || j[i].size() != c)
      throw std::invalid_argument(field + "[" + std::to_string(i) + "]: row length differs");
    for (std::size_t k = 0; k < c; ++k) {
      if (!j[i][k].is_number())
        throw std::invalid_argument(field + "[" + std::to_string(i) + "][" + std::to_string(k) +
                                    "]: expected a number");
      A(i, k) = j[i][k].get<double>();
    }
  }
  return A;
}

json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + ": expected an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::invalid_argument(field + "[" + std::to_string(i) + "]: expected a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

namespace {

json complex_json(cplx c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

json to_json(const IndexResult& r) {
  json samples = json::array();
  for (const WindingSample& s : r.samples)
    samples.push_back({s.t, s.delta.real(), s.delta.imag(), s.arg});
  return json{{"nu", r.nu},
              {"limit", r.limit},
              {"det_one_plus_F", r.det_one_plus_F},
              {"det_sign", r.det_one_plus_F > 0 ? "positive" : "negative"},
              {"half_integer", r.half_integer},
              {"epsilons", r.epsilons},
              {"raw", r.raw},
              {"extrapolated", r.extrapolated},
              {"refinements", r.refinements},
              {"samples", samples}};
}

json to_json(const GaussianSymbol& s) {
  json j{{"c", complex_json(s.c)},
         {"M_re", matrix_to_json(s.M.real())},
         {"M_im", matrix_to_json(s.M.imag())},
         {"phase_index", s.phase_index}};
  if (s.dirac) {
    j["dirac"] = {{"normal", matrix_to_json(s.dirac->normal)},
                  {"support", matrix_to_json(s.dirac->support)}};
  }
  return j;
}

json to_json(const GaussianState& s) {
  return json{{"n", s.n},
              {"hbar", s.hbar},
              {"z", vector_to_json(s.z)},
              {"gamma_re", matrix_to_json(s.gamma.real())},
              {"gamma_im", matrix_to_json(s.gamma.imag())},
              {"a_re", s.a.real()},
              {"a_im", s.a.imag()}};
}

GaussianState state_from_json(const json& j) {
  for (const char* k : {"n", "hbar", "z", "gamma_re", "gamma_im", "a_re", "a_im"})
    if (!j.contains(k)) throw std::invalid_argument(std::string("state: missing field ") + k);
  GaussianState s;
  s.n = j.at("n").get<int>();
  s.hbar = j.at("hbar").get<double>();
  s.z = vector_from_json(j.at("z"), "state.z");
  Mat gr = matrix_from_json(j.at("gamma_re"), "state.gamma_re");
  Mat gi = matrix_from_json(j.at("gamma_im"), "state.gamma_im");
  s.gamma = gr.cast<cplx>() + cplx(0, 1) * gi.cast<cplx>();
  s.a = cplx(j.at("a_re").get<double>(), j.at("a_im").get<double>());
  require(s.z.size() == 2 * s.n && gr.rows() == s.n && gr.cols() == s.n,
          "state: dimensions inconsistent with n");
  return s;
}

namespace {

void put_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_double(row[k]);
  os << '\n';
}

}  // namespace

void write_path_csv(std::ostream& os, const SymplecticPath& path) {
  const Eigen::Index d = path.front().rows();
  os << "t";
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) os << ",F" << i + 1 << '_' << j + 1;
  os << ",arg_det\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::vector<double> row{path.times()[k]};
    const Mat& F = path.matrices()[k];
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) row.push_back(F(i, j));
    row.push_back(path.arg_det()[k]);
    put_row(os, row);
  }
}

void write_winding_csv(std::ostream& os, const IndexResult& r) {
  os << "t,delta_re,delta_im,arg\n";
  for (const WindingSample& s : r.samples) put_row(os, {s.t, s.delta.real(), s.delta.imag(), s.arg});
}

void write_state_path_csv(std::ostream& os, const std::vector<double>& t,
                          const std::vector<GaussianState>& states) {
  require(t.size() == states.size() && !states.empty(), "state path: sizes differ");
  const int n = states.front().n;
  os << "t";
  for (int i = 0; i < n; ++i) os << ",q" << i + 1;
  for (int i = 0; i < n; ++i) os << ",p" << i + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << ",gamma_re" << i + 1 << '_' << j + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << ",gamma_im" << i + 1 << '_' << j + 1;
  os << ",a_re,a_im,phase_re,phase_im\n";
  const cplx b0 = states.front().plain_amplitude();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const GaussianState& s = states[k];
    std::vector<double> row{t[k]};
    for (Eigen::Index i = 0; i < s.z.size(); ++i) row.push_back(s.z(i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(s.gamma(i, j).real());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(s.gamma(i, j).imag());
    cplx ratio = s.plain_amplitude() / b0;
    for (double v : {s.a.real(), s.a.imag(), ratio.real(), ratio.imag()}) row.push_back(v);
    put_row(os, row);
  }
}

void write_wavefunction_csv(std::ostream& os, const GridWavefunction& psi) {
  const Grid& g = psi.grid;
  require(g.n == 1, "wavefunction CSV: n = 1 only");
  os << "# N=" << g.N << " L=" << format_double(g.L) << " dx=" << format_double(g.dx())
     << " hbar=" << format_double(psi.hbar) << '\n';
  os << "x,re,im\n";
  Vec x = g.axis();
  for (Eigen::Index j = 0; j < x.size(); ++j)
    put_row(os, {x(j), psi.psi(j).real(), psi.psi(j).imag()});
}

GridWavefunction read_wavefunction_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw std::invalid_argument("wavefunction CSV: missing header line");
  GridWavefunction w;
  w.grid.n = 1;
  double dx = 0;
  bool haveN = false, haveL = false, haveH = false;
  std::istringstream hs(line.substr(2));
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("wavefunction CSV: bad header " + tok);
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "N") w.grid.N = std::stoi(val), haveN = true;
    else if (key == "L") w.grid.L = std::stod(val), haveL = true;
    else if (key == "dx") dx = std::stod(val);
    else if (key == "hbar") w.hbar = std::stod(val), haveH = true;
    else throw std::invalid_argument("wavefunction CSV: unknown header key " + key);
  }
  if (!haveN || !haveL || !haveH) throw std::invalid_argument("wavefunction CSV: incomplete header");
  w.grid.validate();
  if (dx != 0 && std::abs(dx - w.grid.dx()) > 1e-12 * w.grid.dx())
    throw std::invalid_argument("wavefunction CSV: dx inconsistent with L/N");
  if (!std::getline(is, line) || line != "x,re,im")
    throw std::invalid_argument("wavefunction CSV: missing column line");
  w.psi.resize(w.grid.N);
  Vec x = w.grid.axis();
  for (int j = 0; j < w.grid.N; ++j) {
    if (!std::getline(is, line))
      throw std::invalid_argument("wavefunction CSV: expected " + std::to_string(w.grid.N) + " rows");
    std::istringstream rs(line);
    std::string a, b, c;
    if (!std::getline(rs, a, ',') || !std::getline(rs, b, ',') || !std::getline(rs, c))
      throw std::invalid_argument("wavefunction CSV: row " + std::to_string(j + 1) + " malformed");
    if (std::abs(std::stod(a) - x(j)) > 1e-9 * std::max(1.0, std::abs(x(j))))
      throw std::invalid_argument("wavefunction CSV: row " + std::to_string(j + 1) +
                                  " is off the grid");
    w.psi(j) = cplx(std::stod(b), std::stod(c));
  }
  return w;
}

void write_wigner_csv(std::ostream& os, const GaussianState& s, double extent, int points) {
  require(points >= 2 && extent > 0, "wigner CSV: need points ≥ 2 and extent > 0");
  const int n = s.n;
  Mat pts(2 * n, static_cast<Eigen::Index>(points) * points);
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      Vec z = s.z;
      z(0) += -extent + 2 * extent * i / (points - 1);
      z(n) += -extent + 2 * extent * j / (points - 1);
      pts.col(static_cast<Eigen::Index>(i) * points + j) = z;
    }
  Vec W = wigner(s, pts);
  os << "q,p,W\n";
  for (Eigen::Index k = 0; k < pts.cols(); ++k) put_row(os, {pts(0, k), pts(n, k), W(k)});
}

std::string csv_schema() {
  return R"(flow.csv            t, F<i>_<j> (row-major entries of F_t), arg_det (continuous arg det(A_t + iB_t))
state_path.csv      t, q<k>, p<k>, gamma_re<i>_<j>, gamma_im<i>_<j>, a_re, a_im, phase_re, phase_im
                    a is the amplitude in a·T(z)exp(iΓx·x/2ħ); phase is b_t/b_0 with b = a·exp(iq·p/2ħ)
wigner.csv          q, p, W on a (q1, p1) slice through the centre of the final state
winding.csv         t, delta_re, delta_im, arg (accumulated argument of δ(F_t, iεJ) at the smallest ε)
wavefunction.csv    header "# N=.. L=.. dx=.. hbar=..", then x, re, im
)";
}

}  // namespace qhdyn
