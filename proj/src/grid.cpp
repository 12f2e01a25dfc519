#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

#include "qhdyn/weylq.hpp"

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

// Signed DFT frequency index for position m in DFT order.
int signed_index(int m, int N) { return m < (N + 1) / 2 ? m : m - N; }

CMat embed(const Grid& grid, int dim, const CMat& op1) {
  if (grid.n == 1) return op1;
  CMat I = CMat::Identity(grid.N, grid.N);
  return dim == 0 ? CMat(Eigen::kroneckerProduct(op1, I)) : CMat(Eigen::kroneckerProduct(I, op1));
}

// Circulant matrix with entries g((j − l) mod N).
CMat circulant(const CVec& g) {
  Eigen::Index N = g.size();
  CMat C(N, N);
  for (Eigen::Index j = 0; j < N; ++j)
    for (Eigen::Index l = 0; l < N; ++l) C(j, l) = g((j - l + N) % N);
  return C;
}

CVec spectral_kernel(const Grid& grid, const std::function<double(int, double)>& symbol) {
  const int N = grid.N;
  const double dk = 2 * pi / grid.L;
  CVec g = CVec::Zero(N);
  for (int s = 0; s < N; ++s) {
    cplx acc = 0;
    for (int m = 0; m < N; ++m) {
      int ms = signed_index(m, N);
      acc += symbol(ms, ms * dk) * std::exp(I1 * (2 * pi * ms * s / N));
    }
    g(s) = acc / static_cast<double>(N);
  }
  return g;
}

}  // namespace

void Grid::validate() const {
  require(n == 1 || n == 2, "grid dimension must be 1 or 2");
  require(N >= 4 && L > 0, "grid needs N ≥ 4 points and positive extent");
}

Eigen::Index Grid::size() const { return n == 1 ? N : static_cast<Eigen::Index>(N) * N; }

Vec Grid::axis() const {
  Vec x(N);
  for (int j = 0; j < N; ++j) x(j) = (j - (N - 1) / 2.0) * dx();
  return x;
}

Mat Grid::points() const {
  Vec x = axis();
  Mat P(n, size());
  if (n == 1) {
    P.row(0) = x.transpose();
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        P(0, i * N + j) = x(i);
        P(1, i * N + j) = x(j);
      }
  }
  return P;
}

Vec Grid::wavenumbers() const {
  Vec k(N);
  for (int m = 0; m < N; ++m) k(m) = 2 * pi * signed_index(m, N) / L;
  return k;
}

Vec Grid::momentum_lattice(double hbar) const {
  Vec p(N);
  for (int l = 0; l < N; ++l) p(l) = hbar * 2 * pi * (l - N / 2) / L;
  return p;
}

double GridWavefunction::norm() const {
  return std::sqrt(psi.squaredNorm() * std::pow(grid.dx(), grid.n));
}

cplx GridWavefunction::inner(const GridWavefunction& other) const {
  require(psi.size() == other.psi.size(), "inner: grids differ");
  return psi.dot(other.psi) * std::pow(grid.dx(), grid.n);
}

GridWavefunction GridOperator::apply(const GridWavefunction& psi) const {
  require(psi.psi.size() == K.cols(), "operator and wavefunction grids differ");
  return {grid, K * psi.psi, hbar};
}

GridWavefunction sample(const GaussianState& s, const Grid& grid) {
  grid.validate();
  require(grid.n == s.n, "sample: grid and state dimensions differ");
  CVec v = wavefunction(s, grid.points());
  return {grid, v, s.hbar};
}

std::vector<Eigen::Index> inner_indices(const Grid& grid, double fraction) {
  double half = fraction * grid.L / 2;
  Mat P = grid.points();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < P.cols(); ++j)
    if (P.col(j).cwiseAbs().maxCoeff() <= half) idx.push_back(j);
  return idx;
}

double relative_inner_error(const CVec& a, const CVec& b, const Grid& grid, double fraction) {
  double num = 0, den = 0;
  for (Eigen::Index j : inner_indices(grid, fraction)) {
    num += std::norm(a(j) - b(j));
    den += std::norm(b(j));
  }
  return std::sqrt(num / den);
}

CMat position_operator(const Grid& grid, int dim) {
  grid.validate();
  return embed(grid, dim, CMat(grid.axis().cast<cplx>().asDiagonal()));
}

CMat momentum_operator(const Grid& grid, int dim, double hbar) {
  grid.validate();
  const int N = grid.N;
  auto sym = [N, hbar](int m, double k) { return (N % 2 == 0 && m == -N / 2) ? 0.0 : hbar * k; };
  return embed(grid, dim, circulant(spectral_kernel(grid, sym)));
}

CMat momentum_squared_operator(const Grid& grid, int dim, double hbar) {
  grid.validate();
  auto sym = [hbar](int, double k) { return hbar * hbar * k * k; };
  CMat P2 = circulant(spectral_kernel(grid, sym));
  return embed(grid, dim, CMat(P2.real().cast<cplx>()));
}

PolynomialSymbol quadratic_symbol(const Mat& Q, const Vec& lin, double c0) {
  const int d = static_cast<int>(Q.rows());
  require(Q.cols() == d && lin.size() == d && d % 2 == 0, "quadratic_symbol: bad dimensions");
  PolynomialSymbol A;
  if (c0 != 0) A.push_back({std::vector<int>(d, 0), c0});
  for (int k = 0; k < d; ++k) {
    if (lin(k) == 0) continue;
    std::vector<int> pw(d, 0);
    pw[k] = 1;
    A.push_back({pw, lin(k)});
  }
  Mat Qs = symmetrize(Q);
  for (int k = 0; k < d; ++k)
    for (int l = k; l < d; ++l) {
      double c = k == l ? 0.5 * Qs(k, k) : Qs(k, l);
      if (c == 0) continue;
      std::vector<int> pw(d, 0);
      pw[k] += 1;
      pw[l] += 1;
      A.push_back({pw, c});
    }
  return A;
}

namespace {

struct QuadraticParts {
  Mat Q;
  Vec lin;
  double c0 = 0;
};

QuadraticParts to_quadratic(const PolynomialSymbol& A) {
  require(!A.empty(), "empty polynomial symbol");
  const int d = static_cast<int>(A.front().powers.size());
  QuadraticParts r{Mat::Zero(d, d), Vec::Zero(d), 0.0};
  for (const auto& m : A) {
    require(static_cast<int>(m.powers.size()) == d, "monomials must share the dimension");
    int deg = 0;
    std::vector<int> idx;
    for (int k = 0; k < d; ++k) {
      require(m.powers[k] >= 0, "negative power in monomial");
      deg += m.powers[k];
      for (int r2 = 0; r2 < m.powers[k]; ++r2) idx.push_back(k);
    }
    require(deg <= 2, "polynomial symbol of degree > 2 rejected");
    if (deg == 0) r.c0 += m.coeff;
    if (deg == 1) r.lin(idx[0]) += m.coeff;
    if (deg == 2) {
      if (idx[0] == idx[1]) {
        r.Q(idx[0], idx[0]) += 2 * m.coeff;
      } else {
        r.Q(idx[0], idx[1]) += m.coeff;
        r.Q(idx[1], idx[0]) += m.coeff;
      }
    }
  }
  return r;
}

}  // namespace

PolynomialSymbol composed_symbol(const PolynomialSymbol& A, const Mat& F) {
  QuadraticParts p = to_quadratic(A);
  require(F.rows() == p.Q.rows() && F.cols() == p.Q.cols(), "composed_symbol: dimension mismatch");
  return quadratic_symbol(Mat(F.transpose() * p.Q * F), Vec(F.transpose() * p.lin), p.c0);
}

double evaluate(const PolynomialSymbol& A, const Vec& X) {
  QuadraticParts p = to_quadratic(A);
  return p.c0 + p.lin.dot(X) + 0.5 * X.dot(p.Q * X);
}

GridOperator quantize_quadratic(const PolynomialSymbol& A, const Grid& grid, double hbar) {
  grid.validate();
  QuadraticParts parts = to_quadratic(A);
  const int n = grid.n;
  require(parts.Q.rows() == 2 * n, "symbol dimension must be 2n");
  const Eigen::Index D = grid.size();
  std::vector<CMat> X(n), P(n), P2(n);
  for (int k = 0; k < n; ++k) {
    X[k] = position_operator(grid, k);
    P[k] = momentum_operator(grid, k, hbar);
    P2[k] = momentum_squared_operator(grid, k, hbar);
  }
  auto Z = [&](int k) -> const CMat& { return k < n ? X[k] : P[k - n]; };
  CMat K = parts.c0 * CMat::Identity(D, D);
  for (int k = 0; k < 2 * n; ++k)
    if (parts.lin(k) != 0) K += parts.lin(k) * Z(k);
  for (int k = 0; k < 2 * n; ++k)
    for (int l = k; l < 2 * n; ++l) {
      double c = k == l ? 0.5 * parts.Q(k, k) : parts.Q(k, l);
      if (c == 0) continue;
      CMat term;
      if (k == l) {
        term = k < n ? CMat(X[k] * X[k]) : P2[k - n];
      } else if (k < n && l >= n && l - n == k) {
        term = 0.5 * (X[k] * P[k] + P[k] * X[k]);
      } else {
        term = Z(k) * Z(l);  // commuting pair
      }
      K += c * term;
    }
  return {grid, K, hbar};
}

GridOperator hamiltonian_operator(const QuadraticHamiltonian& H, double t, const Grid& grid) {
  require(H.n() == grid.n, "Hamiltonian and grid dimensions differ");
  PolynomialSymbol A = quadratic_symbol(H.S(t), Vec::Zero(2 * H.n()), 0.0);
  if (A.empty()) return {grid, CMat::Zero(grid.size(), grid.size()), H.hbar()};
  return quantize_quadratic(A, grid, H.hbar());
}

namespace {

CMat step_exponential(const CMat& Hop, double dt, double hbar) {
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat((Hop + Hop.adjoint()) / 2.0));
  if (es.info() != Eigen::Success) throw NumericalError("grid propagator: eigen solver failed");
  CVec ph = (-I1 * dt / hbar * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Applies the evolution from t0 to t1 to every column of `block`.
void evolve_block(const QuadraticHamiltonian& H, const Grid& grid, double t0, double t1,
                  int steps, CMat& block) {
  require(t1 >= t0 && steps >= 1, "grid propagation needs t1 ≥ t0 and steps ≥ 1");
  if (t1 == t0) return;
  if (H.kind() == QuadraticHamiltonian::Kind::callable) {
    double dt = (t1 - t0) / steps;
    for (int s = 0; s < steps; ++s) {
      double tm = t0 + (s + 0.5) * dt;
      block = step_exponential(hamiltonian_operator(H, tm, grid).K, dt, H.hbar()) * block;
    }
    return;
  }
  // Constant pieces: one exact exponential per piece overlap.
  const auto& starts = H.starts();
  double cur = t0;
  while (cur < t1) {
    auto it = std::upper_bound(starts.begin(), starts.end(), cur);
    std::size_t k = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
    double end = k + 1 < starts.size() ? std::min(t1, starts[k + 1]) : t1;
    block = step_exponential(hamiltonian_operator(H, cur, grid).K, end - cur, H.hbar()) * block;
    cur = end;
  }
}

}  // namespace

CMat propagator_matrix(const QuadraticHamiltonian& H, const Grid& grid, double t0, double t1,
                       int steps) {
  CMat U = CMat::Identity(grid.size(), grid.size());
  evolve_block(H, grid, t0, t1, steps, U);
  return U;
}

GridPropagation grid_propagate(const QuadraticHamiltonian& H, const GridWavefunction& psi0,
                               double t0, double t1, int steps) {
  require(std::abs(H.hbar() - psi0.hbar) <= 1e-15 * H.hbar(), "grid_propagate: hbar mismatch");
  CMat v = psi0.psi;
  evolve_block(H, psi0.grid, t0, t1, steps, v);
  GridPropagation r;
  r.psi = {psi0.grid, v.col(0), psi0.hbar};
  r.norm_drift = std::abs(r.psi.norm() - psi0.norm());
  std::vector<Eigen::Index> inner = inner_indices(psi0.grid, 0.8);
  double total = r.psi.psi.squaredNorm(), in = 0;
  for (Eigen::Index j : inner) in += std::norm(r.psi.psi(j));
  r.boundary_mass = (total - in) * std::pow(psi0.grid.dx(), psi0.grid.n);
  r.escaped = r.boundary_mass > 1e-8;
  return r;
}

namespace {

// Band-limited shift ψ(x) → ψ(x − a) of one line of samples.
void shift_line(std::vector<cplx>& line, double a, double L, Eigen::FFT<double>& fft) {
  const int N = static_cast<int>(line.size());
  std::vector<cplx> spec;
  fft.fwd(spec, line);
  for (int m = 0; m < N; ++m) {
    int ms = signed_index(m, N);
    double k = 2 * pi * ms / L;
    if (N % 2 == 0 && ms == -N / 2)
      spec[m] *= std::cos(k * a);
    else
      spec[m] *= std::exp(-I1 * (k * a));
  }
  fft.inv(line, spec);
}

}  // namespace

GridWavefunction translate(const GridWavefunction& psi, const Vec& X) {
  const Grid& g = psi.grid;
  require(X.size() == 2 * g.n, "translate: phase point dimension mismatch");
  const int N = g.N;
  Eigen::FFT<double> fft;
  CVec out = psi.psi;
  std::vector<cplx> line(N);
  if (g.n == 1) {
    for (int j = 0; j < N; ++j) line[j] = out(j);
    shift_line(line, X(0), g.L, fft);
    for (int j = 0; j < N; ++j) out(j) = line[j];
  } else {
    for (int i = 0; i < N; ++i) {  // along the second coordinate
      for (int j = 0; j < N; ++j) line[j] = out(i * N + j);
      shift_line(line, X(1), g.L, fft);
      for (int j = 0; j < N; ++j) out(i * N + j) = line[j];
    }
    for (int j = 0; j < N; ++j) {  // along the first coordinate
      for (int i = 0; i < N; ++i) line[i] = out(i * N + j);
      shift_line(line, X(0), g.L, fft);
      for (int i = 0; i < N; ++i) out(i * N + j) = line[i];
    }
  }
  Mat P = g.points();
  Vec q = X.head(g.n), p = X.tail(g.n);
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out(j) *= std::exp(I1 / psi.hbar * (p.dot(P.col(j)) - q.dot(p) / 2));
  return {g, out, psi.hbar};
}

}  // namespace qhdyn
