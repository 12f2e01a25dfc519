#pragma once

#include <functional>
#include <random>
#include <vector>

#include "qhdyn/linalg.hpp"

namespace qhdyn {

// Phase-space point z = (q, p), q the first n entries.
using PhasePoint = Vec;
// Real 2n×2n matrix with FᵀJF = J.
using SymplecticMatrix = Mat;

Mat standard_symplectic_form(int n);

// σ(X, Y) = JX·Y.
double sigma(const Vec& X, const Vec& Y);

struct Blocks {
  Mat A, B, C, D;
};
Blocks split_blocks(const Mat& F);

Mat rotation(double theta);  // exp(θJ) for n = 1

struct HamiltonianBlocks {
  Mat G, L, K;
};

// H_t(q,p) = ½(G_t q·q + 2 L_t q·p + K_t p·p); S_t = (G, Lᵀ; L, K).
class QuadraticHamiltonian {
 public:
  enum class Kind { constant, piecewise, callable };
  using Sampler = std::function<HamiltonianBlocks(double)>;

  static QuadraticHamiltonian constant(const Mat& G, const Mat& L, const Mat& K,
                                       double hbar = 1.0);
  static QuadraticHamiltonian from_S(const Mat& S, double hbar = 1.0);
  // Piece k holds on [starts[k], starts[k+1]); the last piece extends to +∞
  // and the first one also covers times before starts[0].
  static QuadraticHamiltonian piecewise(std::vector<double> starts,
                                        std::vector<HamiltonianBlocks> pieces,
                                        double hbar = 1.0);
  static QuadraticHamiltonian callable(int n, Sampler sampler, double hbar = 1.0);

  static QuadraticHamiltonian harmonic(int n, double hbar = 1.0);
  static QuadraticHamiltonian free_particle(int n, double hbar = 1.0);
  static QuadraticHamiltonian inverted(int n, double hbar = 1.0);
  static QuadraticHamiltonian zero(int n, double hbar = 1.0);

  int n() const { return n_; }
  double hbar() const { return hbar_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& starts() const { return starts_; }
  const std::vector<HamiltonianBlocks>& pieces() const { return pieces_; }

  HamiltonianBlocks blocks(double t) const;
  Mat S(double t) const;
  double energy(double t, const Vec& z) const;

 private:
  QuadraticHamiltonian() = default;
  int n_ = 0;
  double hbar_ = 1.0;
  Kind kind_ = Kind::constant;
  std::vector<double> starts_;
  std::vector<HamiltonianBlocks> pieces_;
  Sampler sampler_;
};

void validate_blocks(const HamiltonianBlocks& b, int n, double tol = 1e-12);
Mat assemble_S(const HamiltonianBlocks& b);

double symplectic_residual(const Mat& F);
// F·(−J FᵀJF)^{−1/2}: exactly symplectic up to roundoff for F near Sp(2n).
Mat reproject(const Mat& F);

// Continuous curve t ↦ F_t with a mesh on which arg det(A_t + iB_t) moves by
// less than the configured step between neighbours. The evaluator gives F at
// any t in [t0, t1] and is used for refinement by downstream branch trackers.
struct PathOptions {
  double max_arg_step = pi / 4;
  int max_depth = 40;
};

class SymplecticPath {
 public:
  using Evaluator = std::function<Mat(double)>;

  using Options = PathOptions;

  SymplecticPath(std::vector<double> times, std::vector<Mat> matrices, Evaluator eval,
                 Options opt);
  SymplecticPath(std::vector<double> times, std::vector<Mat> matrices, Evaluator eval)
      : SymplecticPath(std::move(times), std::move(matrices), std::move(eval), Options{}) {}

  static SymplecticPath from_function(const Evaluator& f, double t0, double t1, int nodes,
                                      Options opt = {});
  static SymplecticPath constant(const Mat& F, double t0 = 0.0, double t1 = 1.0);

  int n() const { return static_cast<int>(F_.front().rows() / 2); }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<Mat>& matrices() const { return F_; }
  const std::vector<double>& arg_det() const { return arg_; }
  double t0() const { return t_.front(); }
  double t1() const { return t_.back(); }
  const Mat& front() const { return F_.front(); }
  const Mat& back() const { return F_.back(); }
  Mat evaluate(double t) const { return eval_(t); }
  const Evaluator& evaluator() const { return eval_; }
  const Options& options() const { return opt_; }

  // This path followed by `next` (a path from the identity) right-multiplied
  // by this path's endpoint; the result ends at next.back()·back().
  SymplecticPath then(const SymplecticPath& next) const;

 private:
  std::vector<double> t_;
  std::vector<Mat> F_;
  std::vector<double> arg_;
  Evaluator eval_;
  Options opt_;
};

// Continuous argument of f(F_t) along a path, refined by bisection through
// the path evaluator until every sampled step moves the argument by less
// than max_step.
struct ArgumentTrack {
  std::vector<double> t;
  std::vector<Mat> F;
  std::vector<cplx> value;
  std::vector<double> arg;
  std::vector<double> node_arg;  // argument at each path node
  std::vector<std::size_t> node_index;  // sample index of each path node
};
ArgumentTrack track_argument(const SymplecticPath& path,
                             const std::function<cplx(const Mat&)>& f,
                             double max_step = pi / 4, int max_depth = 40);

struct FlowOptions {
  int nodes = 65;
  int substeps = 16;  // one-step integrator steps per interval (callable H)
  double max_arg_step = pi / 4;
  int max_depth = 40;
  double tolerance = 1e-9;
};

SymplecticPath flow(const QuadraticHamiltonian& H, double t0, double t1,
                    const FlowOptions& opt = {});

std::vector<PhasePoint> classical_trajectory(const SymplecticPath& path, const PhasePoint& z0);

struct PolarLog {
  Mat K;  // log of the orthogonal factor, Hamiltonian
  Mat L;  // log of |F|, symmetric Hamiltonian
};
PolarLog polar_log(const Mat& F);
Mat polar_path(const Mat& F, double t);
Mat polar_path(const PolarLog& lg, double t);
SymplecticPath polar_symplectic_path(const Mat& F, int nodes = 33);

// exp(J·S) with S symmetric, entries N(0, scale²) before symmetrization.
Mat random_symplectic(int n, std::mt19937_64& rng, double scale = 0.5);
Mat random_symmetric(int n, std::mt19937_64& rng, double scale);

}  // namespace qhdyn
