#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>

#include "qhdyn/weylq.hpp"

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

// Centre offsets (in node units) and weights interpolating a function of
// the centre from half-integer positions to the node.
constexpr std::array<double, 4> kHalfCentres{-1.5, -0.5, 0.5, 1.5};
constexpr std::array<double, 4> kHalfWeights{-1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16};

struct Pair {
  int i, j;
  double w;
};

// Index pairs (i, j) with i − j = s contributing to the node m.
std::vector<Pair> stencil(int m, int s, int N) {
  std::vector<Pair> out;
  auto push = [&](int i, int j, double w) {
    if (i >= 0 && i < N && j >= 0 && j < N) out.push_back({i, j, w});
  };
  if (s % 2 == 0) {
    push(m + s / 2, m - s / 2, 1.0);
  } else {
    for (std::size_t c = 0; c < kHalfCentres.size(); ++c) {
      // centre m + kHalfCentres[c]; i = centre + s/2, j = centre − s/2
      int i = m + static_cast<int>(std::lround(kHalfCentres[c] + s / 2.0));
      push(i, i - s, kHalfWeights[c]);
    }
  }
  return out;
}

}  // namespace

SymbolSamples symbol_from_kernel(const GridOperator& op) {
  const Grid& g = op.grid;
  require(g.n == 1, "symbol_from_kernel: full-grid output needs n = 1");
  const int N = g.N;
  SymbolSamples r;
  r.q = g.axis();
  r.p = g.momentum_lattice(op.hbar);
  r.values.resize(N, N);
  const int half = N / 2;
  Eigen::FFT<double> fft;
  std::vector<cplx> u(N), U;
  double edge = 0, bulk = 0;
  for (int m = 0; m < N; ++m) {
    std::fill(u.begin(), u.end(), cplx(0));
    for (int s = -half; s < N - half; ++s) {
      cplx v = 0;
      for (const Pair& pr : stencil(m, s, N)) v += pr.w * op.K(pr.i, pr.j);
      u[(s + N) % N] = v;
      double a = std::abs(v);
      bulk = std::max(bulk, a);
      if (std::abs(s) > 3 * N / 8) edge = std::max(edge, a);
    }
    fft.fwd(U, u);  // Σ_s u(s) e^{−2πi s l / N}
    for (int l = 0; l < N; ++l) r.values(m, l) = U[(l - half + N) % N];
  }
  int c = (N - 1) / 2;
  r.interior_begin = std::max(0, c - N / 4 + 2);
  r.interior_end = std::min(N, c + N / 4 - 1);
  r.alias_warning = bulk > 0 && edge > 1e-2 * bulk;
  return r;
}

cplx symbol_from_kernel_at(const GridOperator& op, const std::vector<int>& m, const Vec& p) {
  const Grid& g = op.grid;
  require(static_cast<int>(m.size()) == g.n && p.size() == g.n,
          "symbol_from_kernel_at: index and momentum must have n entries");
  const int N = g.N, half = N / 2;
  const double dx = g.dx();
  cplx total = 0;
  if (g.n == 1) {
    for (int s = -half; s < N - half; ++s) {
      cplx v = 0;
      for (const Pair& pr : stencil(m[0], s, N)) v += pr.w * op.K(pr.i, pr.j);
      total += std::exp(-I1 * (s * dx * p(0) / op.hbar)) * v;
    }
    return total;
  }
  for (int s0 = -half; s0 < N - half; ++s0) {
    std::vector<Pair> a = stencil(m[0], s0, N);
    if (a.empty()) continue;
    for (int s1 = -half; s1 < N - half; ++s1) {
      std::vector<Pair> b = stencil(m[1], s1, N);
      cplx v = 0;
      for (const Pair& pa : a)
        for (const Pair& pb : b) v += pa.w * pb.w * op.K(pa.i * N + pb.i, pa.j * N + pb.j);
      total += std::exp(-I1 * ((s0 * p(0) + s1 * p(1)) * dx / op.hbar)) * v;
    }
  }
  return total;
}

namespace {

// Displaced parity about the centre located at half-index position c2/2,
// phase e^{2ip(x_j − centre)/ħ}; (Π)_{j, c2 − j}.
CMat displaced_parity(const Grid& g, int c2, double p, double hbar) {
  const int N = g.N;
  Vec x = g.axis();
  double centre = (c2 / 2.0 - (N - 1) / 2.0) * g.dx();
  CMat Pi = CMat::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    int mj = c2 - j;
    if (mj < 0 || mj >= N) continue;
    Pi(j, mj) = std::exp(2.0 * I1 * p * (x(j) - centre) / hbar);
  }
  return Pi;
}

cplx trace_product(const CMat& A, const CMat& B) { return A.cwiseProduct(B.transpose()).sum(); }

}  // namespace

cplx parity_symbol(const GridOperator& op, const Vec& X) {
  const Grid& g = op.grid;
  require(g.n == 1 && X.size() == 2, "parity_symbol: n = 1 only");
  double pos = X(0) / g.dx() + (g.N - 1) / 2.0;
  int m = static_cast<int>(std::lround(pos));
  require(std::abs(pos - m) <= 1e-9 && m >= 0 && m < g.N,
          "parity_symbol: q must be a grid node");
  const double p = X(1);
  cplx node = trace_product(op.K, displaced_parity(g, 2 * m, p, op.hbar));
  cplx between = 0;
  for (std::size_t c = 0; c < kHalfCentres.size(); ++c) {
    int c2 = 2 * m + static_cast<int>(std::lround(2 * kHalfCentres[c]));
    between += kHalfWeights[c] * trace_product(op.K, displaced_parity(g, c2, p, op.hbar));
  }
  return 2.0 * 0.5 * (node + between);
}

GridOperator quantize_symbol(const std::function<cplx(double, double)>& A, const Grid& grid,
                             double hbar) {
  grid.validate();
  require(grid.n == 1, "quantize_symbol: n = 1 only");
  const int N = grid.N, half = N / 2;
  const double dx = grid.dx();
  Vec x = grid.axis();
  Vec p = grid.momentum_lattice(hbar);
  Eigen::FFT<double> fft;
  CMat K = CMat::Zero(N, N);
  std::vector<cplx> a(N), u;
  // Centres q_c = (x_i + x_j)/2 indexed by c = i + j.
  for (int c = 0; c <= 2 * (N - 1); ++c) {
    double qc = (c / 2.0 - (N - 1) / 2.0) * dx;
    for (int l = 0; l < N; ++l) a[(l - half + N) % N] = A(qc, p(l));
    fft.inv(u, a);  // (1/N) Σ_l a_l e^{+2πi s l / N}
    // separations beyond the band alias onto short ones; those entries stay 0
    for (int i = std::max(0, c - (N - 1)); i <= std::min(N - 1, c); ++i) {
      int j = c - i;
      K(i, j) = 2 * std::abs(i - j) < N ? u[(i - j + N) % N] : cplx(0);
    }
  }
  return {grid, K, hbar};
}

GridOperator quantize_gaussian(cplx c, const CMat& M, const Grid& grid, double hbar) {
  grid.validate();
  require(grid.n == 1 && M.rows() == 2 && M.cols() == 2, "quantize_gaussian: n = 1 only");
  const cplx mqq = M(0, 0), mqp = 0.5 * (M(0, 1) + M(1, 0)), mpp = M(1, 1);
  require(std::abs(mpp) > 1e-12, "quantize_gaussian: p-p coefficient vanishes");
  const int N = grid.N;
  const double dx = grid.dx();
  Vec x = grid.axis();
  // (2πħ)^{−1} ∫ e^{iuξ/ħ} exp(i(m_qq q² + 2 m_qp q ξ + m_pp ξ²)) dξ
  const cplx fres = std::sqrt(pi / (-I1 * mpp));
  CMat K(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double q = 0.5 * (x(i) + x(j)), u = x(i) - x(j);
      cplx b = u / hbar + 2.0 * mqp * q;
      K(i, j) = c / (2 * pi * hbar) * std::exp(I1 * mqq * q * q) * fres *
                std::exp(-I1 * b * b / (4.0 * mpp)) * dx;
    }
  return {grid, K, hbar};
}

PhaseSamples sample_phase(const std::function<cplx(double, double)>& A, const Vec& q,
                          const Vec& p, double hbar) {
  PhaseSamples s{q, p, CMat(q.size(), p.size()), hbar};
  for (Eigen::Index i = 0; i < q.size(); ++i)
    for (Eigen::Index j = 0; j < p.size(); ++j) s.values(i, j) = A(q(i), p(j));
  return s;
}

CMat covariant_from_contravariant(const PhaseSamples& A, const Vec& out_q, const Vec& out_p) {
  require(A.q.size() >= 2 && A.p.size() >= 2, "covariant transform needs at least 2×2 samples");
  const double h = A.hbar;
  const double dy = A.q(1) - A.q(0), de = A.p(1) - A.p(0);
  // R(a, b) = Σ_{y,η} e^{−iξ_b y/ħ} e^{i x_a η/ħ} A(y, η)
  CMat Ex(out_q.size(), A.p.size()), Exi(out_p.size(), A.q.size());
  for (Eigen::Index a = 0; a < out_q.size(); ++a)
    for (Eigen::Index k = 0; k < A.p.size(); ++k) Ex(a, k) = std::exp(I1 * out_q(a) * A.p(k) / h);
  for (Eigen::Index b = 0; b < out_p.size(); ++b)
    for (Eigen::Index k = 0; k < A.q.size(); ++k)
      Exi(b, k) = std::exp(-I1 * out_p(b) * A.q(k) / h);
  CMat R = Ex * A.values.transpose() * Exi.transpose();
  return R * (dy * de / (2 * pi * h));
}

TracePair trace_pairing(const std::function<cplx(double, double)>& A,
                        const std::function<cplx(double, double)>& B, const Grid& grid,
                        double hbar) {
  GridOperator Aop = quantize_symbol(A, grid, hbar);
  GridOperator Bop = quantize_symbol(B, grid, hbar);
  TracePair r;
  r.operator_trace = trace_product(Aop.K, Bop.K);
  Vec q = grid.axis(), p = grid.momentum_lattice(hbar);
  const double dp = p(1) - p(0);
  cplx acc = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i)
    for (Eigen::Index j = 0; j < p.size(); ++j) acc += A(q(i), p(j)) * B(q(i), p(j));
  r.phase_space = acc * grid.dx() * dp / (2 * pi * hbar);
  return r;
}

cplx mean_value(const PhaseSamples& cov, const GridWavefunction& phi,
                const GridWavefunction& psi) {
  const Grid& g = psi.grid;
  require(g.n == 1, "mean_value: n = 1 only");
  require(phi.psi.size() == psi.psi.size(), "mean_value: grids differ");
  const double h = psi.hbar;
  const double dq = cov.q(1) - cov.q(0), dp = cov.p(1) - cov.p(0);
  Vec x = g.axis();
  cplx total = 0;
  for (Eigen::Index i = 0; i < cov.q.size(); ++i) {
    Vec X0(2);
    X0 << cov.q(i), 0.0;
    CVec shifted = translate(psi, X0).psi;  // ψ(x − q)
    CVec w = phi.psi.conjugate().cwiseProduct(shifted);
    for (Eigen::Index j = 0; j < cov.p.size(); ++j) {
      double pj = cov.p(j);
      cplx s = 0;
      for (Eigen::Index k = 0; k < x.size(); ++k) s += w(k) * std::exp(I1 * pj * x(k) / h);
      cplx me = s * g.dx() * std::exp(-I1 * cov.q(i) * pj / (2 * h));
      total += cov.values(i, j) * me;
    }
  }
  return total * dq * dp / (2 * pi * h);
}

}  // namespace qhdyn
