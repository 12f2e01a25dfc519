#pragma once

#include <functional>
#include <vector>

#include "qhdyn/coherent.hpp"
#include "qhdyn/symcore.hpp"

namespace qhdyn {

// Uniform periodic position grid, N points per dimension, box length L per
// dimension, nodes x_j = (j − (N−1)/2)·dx with dx = L/N. Multi-dimensional
// samples are stored with the first coordinate's index varying slowest.
struct Grid {
  int n = 1;
  int N = 256;
  double L = 20.0;

  double dx() const { return L / N; }
  Eigen::Index size() const;
  Vec axis() const;
  Mat points() const;       // n × size
  Vec wavenumbers() const;  // DFT order: 2πm/L for m = 0, 1, …, −1
  // Momentum lattice ħ·2πl/L for l = −N/2, …, N/2 − 1 (ascending).
  Vec momentum_lattice(double hbar) const;
  void validate() const;
};

struct GridWavefunction {
  Grid grid;
  CVec psi;
  double hbar = 1.0;

  double norm() const;
  cplx inner(const GridWavefunction& other) const;  // ⟨this|other⟩
};

struct GridOperator {
  Grid grid;
  CMat K;  // acts on sample vectors; continuous kernel ≈ K/dxⁿ
  double hbar = 1.0;

  GridWavefunction apply(const GridWavefunction& psi) const;
};

GridWavefunction sample(const GaussianState& s, const Grid& grid);

// Fraction of the grid used for comparisons; indices of the inner region.
std::vector<Eigen::Index> inner_indices(const Grid& grid, double fraction = 0.8);
// ‖a − b‖ / ‖b‖ over the inner region.
double relative_inner_error(const CVec& a, const CVec& b, const Grid& grid,
                            double fraction = 0.8);

// One-dimensional building blocks along coordinate `dim`, embedded in the
// full tensor grid.
CMat position_operator(const Grid& grid, int dim);
// Spectral derivative −iħ∂ with the Nyquist mode dropped.
CMat momentum_operator(const Grid& grid, int dim, double hbar);
// Spectral −ħ²∂² keeping the Nyquist mode.
CMat momentum_squared_operator(const Grid& grid, int dim, double hbar);

// Real polynomial symbol in X = (q₁…qₙ, p₁…pₙ).
struct Monomial {
  std::vector<int> powers;
  double coeff = 0.0;
};
using PolynomialSymbol = std::vector<Monomial>;

// c0 + lin·X + ½ XᵀQX
PolynomialSymbol quadratic_symbol(const Mat& Q, const Vec& lin, double c0);
PolynomialSymbol composed_symbol(const PolynomialSymbol& A, const Mat& F);  // A∘F, degree ≤ 2
double evaluate(const PolynomialSymbol& A, const Vec& X);

// Weyl quantization of a degree ≤ 2 polynomial; throws on higher degree.
GridOperator quantize_quadratic(const PolynomialSymbol& A, const Grid& grid, double hbar);
GridOperator hamiltonian_operator(const QuadraticHamiltonian& H, double t, const Grid& grid);

// Weyl quantization of a general decaying symbol on an n = 1 grid, with the
// momentum integral taken on the grid's momentum lattice.
GridOperator quantize_symbol(const std::function<cplx(double, double)>& A, const Grid& grid,
                             double hbar);
// Kernel of c·exp(iMX·X) on an n = 1 grid, momentum integral in closed form.
GridOperator quantize_gaussian(cplx c, const CMat& M, const Grid& grid, double hbar);

struct SymbolSamples {
  Vec q;        // grid nodes
  Vec p;        // momentum lattice
  CMat values;  // values(m, l) = A(q_m, p_l)
  Eigen::Index interior_begin = 0, interior_end = 0;  // exact-stencil range of m
  bool alias_warning = false;  // kernel mass outside the resolvable band
};

// A(q,p) = ∫ e^{−iup/ħ} K(q+u/2, q−u/2) du on n = 1 grids. Offsets with odd
// separation are centred between nodes; their values at x_m are obtained by
// four-point interpolation in the centre variable.
SymbolSamples symbol_from_kernel(const GridOperator& op);
// Same transform at one point for n = 1 or 2: node multi-index m, momentum p.
cplx symbol_from_kernel_at(const GridOperator& op, const std::vector<int>& m, const Vec& p);

// 2ⁿ Tr[K·Π_X] with Π_X the displaced parity e^{2ip(x−q)/ħ}φ(2q−x), averaged
// over reflection centres at and between nodes. q must be a grid node (n = 1).
cplx parity_symbol(const GridOperator& op, const Vec& X);

// A samples on a tensor phase grid for n = 1: values(i, j) = A(q_i, p_j).
struct PhaseSamples {
  Vec q, p;
  CMat values;
  double hbar = 1.0;
};
PhaseSamples sample_phase(const std::function<cplx(double, double)>& A, const Vec& q,
                          const Vec& p, double hbar);

// A^#(x,ξ) = (2πħ)^{−1} ∫ e^{−(i/ħ)(ξy − xη)} A(y,η) dy dη by the rectangle
// rule on the sample grid; output on the tensor grid (out_q × out_p).
CMat covariant_from_contravariant(const PhaseSamples& A, const Vec& out_q, const Vec& out_p);

struct TracePair {
  cplx operator_trace;
  cplx phase_space;
};
// Tr[ÂB̂] as a matrix trace of quantized operators and as (2πħ)^{−1}∫AB.
TracePair trace_pairing(const std::function<cplx(double, double)>& A,
                        const std::function<cplx(double, double)>& B, const Grid& grid,
                        double hbar);

struct GridPropagation {
  GridWavefunction psi;
  double boundary_mass = 0.0;
  bool escaped = false;
  double norm_drift = 0.0;
};

// Exact for constant and piecewise-constant H (one eigendecomposition per
// piece); midpoint exponentials for callable H.
CMat propagator_matrix(const QuadraticHamiltonian& H, const Grid& grid, double t0, double t1,
                       int steps);
GridPropagation grid_propagate(const QuadraticHamiltonian& H, const GridWavefunction& psi0,
                               double t0, double t1, int steps);

// Spectral Weyl translate T̂(X)ψ(x) = e^{(i/ħ)(p·x − q·p/2)} ψ(x − q).
GridWavefunction translate(const GridWavefunction& psi, const Vec& X);

// (2πħ)^{−1} Σ A^#(X)⟨φ|T̂(X)ψ⟩ ΔX on the phase grid of `cov` (n = 1).
cplx mean_value(const PhaseSamples& cov, const GridWavefunction& phi,
                const GridWavefunction& psi);

}  // namespace qhdyn
