#include "qhdyn/symcore.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace qhdyn {

Mat standard_symplectic_form(int n) {
  require(n >= 1, "dimension must be at least 1");
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Mat::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return J;
}

double sigma(const Vec& X, const Vec& Y) {
  require(X.size() == Y.size() && X.size() % 2 == 0, "sigma: dimension mismatch");
  int n = static_cast<int>(X.size() / 2);
  // JX = (p, −q)
  return X.tail(n).dot(Y.head(n)) - X.head(n).dot(Y.tail(n));
}

Blocks split_blocks(const Mat& F) {
  require(F.rows() == F.cols() && F.rows() % 2 == 0, "split_blocks: not 2n×2n");
  Eigen::Index n = F.rows() / 2;
  return {F.topLeftCorner(n, n), F.topRightCorner(n, n), F.bottomLeftCorner(n, n),
          F.bottomRightCorner(n, n)};
}

Mat rotation(double theta) {
  Mat R(2, 2);
  R << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return R;
}

void validate_blocks(const HamiltonianBlocks& b, int n, double tol) {
  require(b.G.rows() == n && b.G.cols() == n && b.L.rows() == n && b.L.cols() == n &&
              b.K.rows() == n && b.K.cols() == n,
          "Hamiltonian blocks must be n×n");
  double scale = std::max({1.0, inf_norm(b.G), inf_norm(b.K)});
  require(inf_norm(Mat(b.G - b.G.transpose())) <= tol * scale, "G must be symmetric");
  require(inf_norm(Mat(b.K - b.K.transpose())) <= tol * scale, "K must be symmetric");
  require(b.G.allFinite() && b.L.allFinite() && b.K.allFinite(),
          "Hamiltonian coefficients must be finite");
}

Mat assemble_S(const HamiltonianBlocks& b) {
  Eigen::Index n = b.G.rows();
  Mat S(2 * n, 2 * n);
  S << b.G, b.L.transpose(), b.L, b.K;
  return S;
}

QuadraticHamiltonian QuadraticHamiltonian::constant(const Mat& G, const Mat& L, const Mat& K,
                                                    double hbar) {
  require(hbar > 0, "hbar must be positive");
  QuadraticHamiltonian H;
  H.n_ = static_cast<int>(G.rows());
  H.hbar_ = hbar;
  H.kind_ = Kind::constant;
  HamiltonianBlocks b{G, L, K};
  validate_blocks(b, H.n_);
  H.starts_ = {0.0};
  H.pieces_ = {b};
  return H;
}

QuadraticHamiltonian QuadraticHamiltonian::from_S(const Mat& S, double hbar) {
  require(S.rows() == S.cols() && S.rows() % 2 == 0, "S must be 2n×2n");
  Eigen::Index n = S.rows() / 2;
  Mat Ss = symmetrize(S);
  return constant(Ss.topLeftCorner(n, n), Ss.bottomLeftCorner(n, n),
                  Ss.bottomRightCorner(n, n), hbar);
}

QuadraticHamiltonian QuadraticHamiltonian::piecewise(std::vector<double> starts,
                                                     std::vector<HamiltonianBlocks> pieces,
                                                     double hbar) {
  require(hbar > 0, "hbar must be positive");
  require(!pieces.empty() && starts.size() == pieces.size(),
          "piecewise Hamiltonian needs one start time per piece");
  require(std::is_sorted(starts.begin(), starts.end()) &&
              std::adjacent_find(starts.begin(), starts.end()) == starts.end(),
          "piece start times must be strictly increasing");
  QuadraticHamiltonian H;
  H.n_ = static_cast<int>(pieces.front().G.rows());
  H.hbar_ = hbar;
  H.kind_ = pieces.size() == 1 ? Kind::constant : Kind::piecewise;
  for (const auto& b : pieces) validate_blocks(b, H.n_);
  H.starts_ = std::move(starts);
  H.pieces_ = std::move(pieces);
  return H;
}

QuadraticHamiltonian QuadraticHamiltonian::callable(int n, Sampler sampler, double hbar) {
  require(hbar > 0, "hbar must be positive");
  require(n >= 1 && static_cast<bool>(sampler), "callable Hamiltonian needs a sampler");
  QuadraticHamiltonian H;
  H.n_ = n;
  H.hbar_ = hbar;
  H.kind_ = Kind::callable;
  H.sampler_ = std::move(sampler);
  return H;
}

QuadraticHamiltonian QuadraticHamiltonian::harmonic(int n, double hbar) {
  Mat I = Mat::Identity(n, n);
  return constant(I, Mat::Zero(n, n), I, hbar);
}

QuadraticHamiltonian QuadraticHamiltonian::free_particle(int n, double hbar) {
  return constant(Mat::Zero(n, n), Mat::Zero(n, n), Mat::Identity(n, n), hbar);
}

QuadraticHamiltonian QuadraticHamiltonian::inverted(int n, double hbar) {
  Mat I = Mat::Identity(n, n);
  return constant(-I, Mat::Zero(n, n), I, hbar);
}

QuadraticHamiltonian QuadraticHamiltonian::zero(int n, double hbar) {
  Mat Z = Mat::Zero(n, n);
  return constant(Z, Z, Z, hbar);
}

HamiltonianBlocks QuadraticHamiltonian::blocks(double t) const {
  if (kind_ == Kind::callable) {
    HamiltonianBlocks b = sampler_(t);
    validate_blocks(b, n_);
    return b;
  }
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t k = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  return pieces_[k];
}

Mat QuadraticHamiltonian::S(double t) const { return assemble_S(blocks(t)); }

double QuadraticHamiltonian::energy(double t, const Vec& z) const {
  return 0.5 * z.dot(S(t) * z);
}

double symplectic_residual(const Mat& F) {
  require(F.rows() == F.cols() && F.rows() % 2 == 0, "residual: not 2n×2n");
  Mat J = standard_symplectic_form(static_cast<int>(F.rows() / 2));
  return inf_norm(Mat(F.transpose() * J * F - J));
}

Mat reproject(const Mat& F) {
  Mat J = standard_symplectic_form(static_cast<int>(F.rows() / 2));
  Mat W = -J * F.transpose() * J * F;
  Mat E = W - Mat::Identity(W.rows(), W.cols());
  double e = inf_norm(E);
  Mat inv_sqrt;
  if (e < 1e-4) {
    // (1+E)^{-1/2} = 1 − E/2 + 3E²/8 − 5E³/16 + …
    Mat E2 = E * E;
    inv_sqrt = Mat::Identity(W.rows(), W.cols()) - 0.5 * E + 0.375 * E2 - 0.3125 * E2 * E;
  } else {
    Eigen::EigenSolver<Mat> es(W);
    CMat V = es.eigenvectors();
    CVec d = es.eigenvalues().cwiseSqrt().cwiseInverse();
    inv_sqrt = (V * d.asDiagonal() * V.inverse()).real();
  }
  return F * inv_sqrt;
}

namespace {

cplx det_A_iB(const Mat& F) {
  Blocks b = split_blocks(F);
  return CMat(b.A.cast<cplx>() + cplx(0, 1) * b.B.cast<cplx>()).determinant();
}

struct Sample {
  double t;
  Mat F;
  cplx w;
};

// Appends samples strictly after `a` up to and including `b`, bisecting until
// each step moves arg f by less than max_step.
template <class Fn>
void refine_segment(const Sample& a, const Sample& b, const SymplecticPath::Evaluator& eval,
                    const Fn& f, double max_step, int depth, std::vector<Sample>& out) {
  double step = std::abs(std::arg(b.w / a.w));
  if (step < max_step) {
    out.push_back(b);
    return;
  }
  if (depth <= 0)
    throw NumericalError("mesh-refinement-exhausted: argument step " + std::to_string(step) +
                         " near t = " + std::to_string(a.t));
  double tm = 0.5 * (a.t + b.t);
  Mat Fm = eval(tm);
  Sample m{tm, Fm, f(Fm)};
  refine_segment(a, m, eval, f, max_step, depth - 1, out);
  refine_segment(m, b, eval, f, max_step, depth - 1, out);
}

}  // namespace

SymplecticPath::SymplecticPath(std::vector<double> times, std::vector<Mat> matrices,
                               Evaluator eval, Options opt)
    : eval_(std::move(eval)), opt_(opt) {
  require(!times.empty() && times.size() == matrices.size(),
          "path needs matching times and matrices");
  require(std::is_sorted(times.begin(), times.end()), "path times must be increasing");
  require(static_cast<bool>(eval_), "path needs an evaluator");
  auto f = [](const Mat& F) { return det_A_iB(F); };
  std::vector<Sample> samples;
  samples.push_back({times[0], matrices[0], f(matrices[0])});
  for (std::size_t k = 1; k < times.size(); ++k) {
    Sample b{times[k], matrices[k], f(matrices[k])};
    Sample a = samples.back();
    refine_segment(a, b, eval_, f, opt_.max_arg_step, opt_.max_depth, samples);
  }
  double arg = std::arg(samples[0].w);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0) arg += std::arg(samples[k].w / samples[k - 1].w);
    t_.push_back(samples[k].t);
    F_.push_back(std::move(samples[k].F));
    arg_.push_back(arg);
  }
}

SymplecticPath SymplecticPath::from_function(const Evaluator& f, double t0, double t1,
                                             int nodes, Options opt) {
  require(nodes >= 2 && t1 >= t0, "path needs at least two nodes on an ordered interval");
  std::vector<double> ts(nodes);
  std::vector<Mat> Fs(nodes);
  for (int k = 0; k < nodes; ++k) {
    ts[k] = t0 + (t1 - t0) * k / (nodes - 1);
    Fs[k] = f(ts[k]);
  }
  return SymplecticPath(std::move(ts), std::move(Fs), f, opt);
}

SymplecticPath SymplecticPath::constant(const Mat& F, double t0, double t1) {
  return SymplecticPath({t0, t1}, {F, F}, [F](double) { return F; });
}

SymplecticPath SymplecticPath::then(const SymplecticPath& next) const {
  require(next.n() == n(), "path concatenation: dimension mismatch");
  double shift = t1() - next.t0();
  double split = t1();
  Mat Fend = back();
  Evaluator first = eval_;
  Evaluator second = next.eval_;
  Evaluator eval = [=](double t) {
    return t <= split ? first(t) : Mat(second(t - shift) * Fend);
  };
  std::vector<double> ts = t_;
  std::vector<Mat> Fs = F_;
  for (std::size_t k = 1; k < next.size(); ++k) {
    ts.push_back(next.times()[k] + shift);
    Fs.push_back(next.matrices()[k] * Fend);
  }
  return SymplecticPath(std::move(ts), std::move(Fs), eval, opt_);
}

ArgumentTrack track_argument(const SymplecticPath& path,
                             const std::function<cplx(const Mat&)>& f, double max_step,
                             int max_depth) {
  ArgumentTrack tr;
  const auto& ts = path.times();
  const auto& Fs = path.matrices();
  std::vector<Sample> seg;
  Sample prev{ts[0], Fs[0], f(Fs[0])};
  require(std::abs(prev.w) > 0, "track_argument: function vanishes at path start");
  double arg = std::arg(prev.w);
  tr.t.push_back(prev.t);
  tr.F.push_back(prev.F);
  tr.value.push_back(prev.w);
  tr.arg.push_back(arg);
  tr.node_arg.push_back(arg);
  tr.node_index.push_back(0);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    seg.clear();
    Sample b{ts[k], Fs[k], f(Fs[k])};
    refine_segment(prev, b, path.evaluator(), f, max_step, max_depth, seg);
    for (const auto& s : seg) {
      arg += std::arg(s.w / prev.w);
      tr.t.push_back(s.t);
      tr.F.push_back(s.F);
      tr.value.push_back(s.w);
      tr.arg.push_back(arg);
      prev = s;
    }
    tr.node_arg.push_back(arg);
    tr.node_index.push_back(tr.t.size() - 1);
  }
  return tr;
}

namespace {

Mat rk4_step(const QuadraticHamiltonian& H, const Mat& J, double t, double h, const Mat& F) {
  auto rhs = [&](double s, const Mat& X) -> Mat { return J * H.S(s) * X; };
  Mat k1 = rhs(t, F);
  Mat k2 = rhs(t + h / 2, F + h / 2 * k1);
  Mat k3 = rhs(t + h / 2, F + h / 2 * k2);
  Mat k4 = rhs(t + h, F + h * k3);
  return reproject(F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
}

}  // namespace

SymplecticPath flow(const QuadraticHamiltonian& H, double t0, double t1, const FlowOptions& opt) {
  require(t1 >= t0, "flow: t1 must not precede t0");
  require(opt.nodes >= 2 && opt.substeps >= 1, "flow: invalid mesh control");
  const int n = H.n();
  const Mat J = standard_symplectic_form(n);
  SymplecticPath::Options popt{opt.max_arg_step, opt.max_depth};
  SymplecticPath::Evaluator eval;

  if (H.kind() == QuadraticHamiltonian::Kind::constant) {
    Mat JS = J * H.S(t0);
    eval = [JS, t0](double t) { return reproject(expm(Mat((t - t0) * JS))); };
  } else if (H.kind() == QuadraticHamiltonian::Kind::piecewise) {
    std::vector<double> starts = H.starts();
    std::vector<Mat> gens;
    for (const auto& b : H.pieces()) gens.push_back(J * assemble_S(b));
    eval = [starts, gens, t0, n](double t) {
      Mat F = Mat::Identity(2 * n, 2 * n);
      double cur = t0;
      while (cur < t) {
        auto it = std::upper_bound(starts.begin(), starts.end(), cur);
        std::size_t k = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
        double end = k + 1 < starts.size() ? std::min(t, starts[k + 1]) : t;
        F = expm(Mat((end - cur) * gens[k])) * F;
        cur = end;
      }
      return reproject(F);
    };
  } else {
    // One-step integration from the nearest preceding stored node.
    const double h = (t1 - t0) / ((opt.nodes - 1) * opt.substeps);
    auto nodes = std::make_shared<std::vector<std::pair<double, Mat>>>();
    Mat F = Mat::Identity(2 * n, 2 * n);
    nodes->push_back({t0, F});
    for (int k = 1; k < opt.nodes; ++k) {
      double ta = t0 + (t1 - t0) * (k - 1) / (opt.nodes - 1);
      for (int s = 0; s < opt.substeps; ++s) F = rk4_step(H, J, ta + s * h, h, F);
      nodes->push_back({t0 + (t1 - t0) * k / (opt.nodes - 1), F});
    }
    eval = [nodes, H, J, h](double t) {
      std::size_t k = 0;
      while (k + 1 < nodes->size() && (*nodes)[k + 1].first <= t) ++k;
      double ta = (*nodes)[k].first;
      Mat F = (*nodes)[k].second;
      if (t <= ta) return F;
      int steps = std::max(1, static_cast<int>(std::ceil((t - ta) / h - 1e-9)));
      double hs = (t - ta) / steps;
      for (int s = 0; s < steps; ++s) F = rk4_step(H, J, ta + s * hs, hs, F);
      return F;
    };
  }

  std::vector<double> ts(opt.nodes);
  std::vector<Mat> Fs(opt.nodes);
  for (int k = 0; k < opt.nodes; ++k) {
    ts[k] = t0 + (t1 - t0) * k / (opt.nodes - 1);
    Fs[k] = k == 0 ? Mat::Identity(2 * n, 2 * n) : eval(ts[k]);
  }
  SymplecticPath path(std::move(ts), std::move(Fs), eval, popt);
  for (const auto& F : path.matrices()) {
    double scale = std::max(1.0, inf_norm(F) * inf_norm(F));
    if (symplectic_residual(F) > opt.tolerance * scale)
      throw NumericalError("flow: symplecticity residual " +
                           std::to_string(symplectic_residual(F)) + " exceeds tolerance");
  }
  return path;
}

std::vector<PhasePoint> classical_trajectory(const SymplecticPath& path, const PhasePoint& z0) {
  require(z0.size() == 2 * path.n(), "classical_trajectory: dimension mismatch");
  std::vector<PhasePoint> out;
  out.reserve(path.size());
  for (const auto& F : path.matrices()) out.push_back(F * z0);
  return out;
}

PolarLog polar_log(const Mat& F) {
  int n = static_cast<int>(F.rows() / 2);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(Mat(F.transpose() * F)));
  const Vec& lam = es.eigenvalues();
  if (lam.minCoeff() <= 0)
    throw NumericalError("polar_log: FᵀF has a non-positive eigenvalue");
  const Mat& Q = es.eigenvectors();
  Mat L = Q * lam.array().log().matrix().asDiagonal() * Q.transpose() * 0.5;
  Mat absF_inv = Q * lam.array().rsqrt().matrix().asDiagonal() * Q.transpose();
  Mat V = F * absF_inv;
  CMat U = V.topLeftCorner(n, n).cast<cplx>() + cplx(0, 1) * V.topRightCorner(n, n).cast<cplx>();
  Eigen::ComplexSchur<CMat> schur(U);
  const CMat& T = schur.matrixT();
  CVec logd(n);
  for (int k = 0; k < n; ++k) logd(k) = cplx(0, std::arg(T(k, k)));
  CMat logU = schur.matrixU() * logd.asDiagonal() * schur.matrixU().adjoint();
  Mat Ar = logU.real(), Bi = logU.imag();
  Mat K(2 * n, 2 * n);
  K << Ar, Bi, -Bi, Ar;
  return {K, symmetrize(L)};
}

Mat polar_path(const PolarLog& lg, double t) {
  return expm(Mat(t * lg.K)) * expm(Mat(t * lg.L));
}

Mat polar_path(const Mat& F, double t) { return polar_path(polar_log(F), t); }

SymplecticPath polar_symplectic_path(const Mat& F, int nodes) {
  PolarLog lg = polar_log(F);
  return SymplecticPath::from_function([lg](double t) { return polar_path(lg, t); }, 0.0, 1.0,
                                       nodes);
}

Mat random_symmetric(int d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> N(0.0, scale);
  Mat A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = N(rng);
  return symmetrize(A);
}

Mat random_symplectic(int n, std::mt19937_64& rng, double scale) {
  Mat J = standard_symplectic_form(n);
  return reproject(expm(Mat(J * random_symmetric(2 * n, rng, scale))));
}

}  // namespace qhdyn
