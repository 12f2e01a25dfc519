#pragma once

#include <optional>
#include <vector>

#include "qhdyn/coherent.hpp"
#include "qhdyn/symcore.hpp"

// ħ = 1 throughout this module.

namespace qhdyn {

// Distribution c·δ_W(z)·exp(iM w·w), w = supportᵀz, where δ_W is the
// Euclidean surface measure on W = span(support); M then acts on support
// coordinates.
struct DiracDecoration {
  Mat normal;   // orthonormal basis of W^⊥ (the Dirac directions)
  Mat support;  // orthonormal basis of W
};

// c·exp(iMX·X), optionally decorated by a Dirac factor.
struct GaussianSymbol {
  cplx c;
  CMat M;
  double phase_index = 0.0;  // ν for contravariant, μ for covariant symbols
  std::optional<DiracDecoration> dirac;

  int dim() const { return dirac ? static_cast<int>(dirac->support.cols()) : static_cast<int>(M.rows()); }
  // Pointwise value (undecorated symbols only).
  cplx operator()(const Vec& X) const;
};

// ∫ R(z) f(z) dz with f(z) = exp(−½(z − z0)ᵀW(z − z0)), W SPD, in closed form.
cplx pair_with_gaussian(const GaussianSymbol& R, const Mat& W, const Vec& z0);

// 𝓜 = JM with M complex symmetric and Im M positive definite.
struct HamiltonianComplexMatrix {
  CMat calM;

  static HamiltonianComplexMatrix from_M(const CMat& M);
  static HamiltonianComplexMatrix regularizer(int n, double eps);  // iεJ
  CMat M() const;
  void validate(double tol = 1e-10) const;
};

// δ(F, 𝓜₀) = det((1 + 𝓜₀ + F(1 − 𝓜₀))/2)
cplx delta_det(const Mat& F, const CMat& calM0);

struct SymbolNode {
  double t;
  GaussianSymbol symbol;
};

// Closed-form (Cayley) evolution with α_t = δ(F_t, 𝓜₀)^{−1/2} on the
// continuous branch along the flow.
std::vector<SymbolNode> symbol_evolution(const QuadraticHamiltonian& H,
                                         const HamiltonianComplexMatrix& M0, double t0,
                                         double t1, const FlowOptions& opt = {});
// Direct one-step integration of 𝓜̇ = ½(𝓜+1)𝓢(𝓜−1), α̇ = ¼Tr(𝓜𝓢)α.
SymbolNode symbol_evolution_ode(const QuadraticHamiltonian& H, const HamiltonianComplexMatrix& M0,
                                double t0, double t1, int steps);

struct WindingSample {
  double t;
  cplx delta;
  double arg;
};

struct IndexResult {
  double nu = 0.0;
  double limit = 0.0;                // extrapolated lim Im∫δ̇/δ
  std::vector<double> epsilons;      // schedule used
  std::vector<double> raw;           // accumulated argument per ε
  std::vector<double> extrapolated;  // successive Richardson values
  std::vector<WindingSample> samples;  // winding at the smallest ε
  double det_one_plus_F = 0.0;
  bool half_integer = false;
  int refinements = 0;
};

struct IndexOptions {
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  double agreement = 1e-3 * 2 * pi;
  double max_arg_step = pi / 8;
  int max_depth = 48;
  int max_refinements = 2;
};

IndexResult cz_index(const SymplecticPath& path, const IndexOptions& opt = {});

// 2ⁿ e^{−iπν} |det(1+F)|^{−1/2} exp(iMX·X), M = −J(1−F)(1+F)⁻¹.
GaussianSymbol mw_contravariant(const Mat& F, double nu);

// α^ε exp(iM^εX·X) from 𝓜₀ = iεJ along the path.
GaussianSymbol regularized_contravariant(const SymplecticPath& path, double eps);

// d(F) = det(1 + F + iJ(1 − F)) with its argument continued along a path.
struct MetaplecticBranch {
  Mat F;
  cplx d;
  double arg_d = 0.0;

  cplx inv_sqrt_d() const;
};
MetaplecticBranch metaplectic_branch(const SymplecticPath& path);
// Branch at F2 obtained by continuing b along the straight segment b.F → F2.
MetaplecticBranch continue_branch(const MetaplecticBranch& b, const Mat& F2, int steps = 64);

// (1+F)(1+F+iJ(1−F))⁻¹
CMat K_F(const Mat& F);

// ⟨φ_{z+X}| R̂ φ_z⟩ for the operator defined by the branch.
cplx matrix_element(const MetaplecticBranch& b, const Vec& z, const Vec& X);

// Covariant symbol for det(1−F) ≠ 0; μ = arg(c)/π.
GaussianSymbol covariant_symbol(const MetaplecticBranch& b);

struct DegenerateReport {
  int eigenspace_dim = 0;  // dim 𝓔′
  int dirac_dim = 0;       // dim W^⊥
  std::vector<int> candidate_ranks;  // ranks of (1−F) near the threshold
  int signature_Q = 0;     // ε → 0 signature of the regularized Q′
  double convergence = 0;  // difference of successive extrapolants
};

// F^ε: (1−L′^ε)(1+L′^ε)⁻¹ on 𝓔′ with L′^ε = L′ − εJ′, identity action kept
// on the symplectic complement.
Mat regularize_eigenvalue_one(const Mat& F, double eps, double rank_tol = 1e-8);

GaussianSymbol degenerate_covariant(const MetaplecticBranch& b, DegenerateReport* report = nullptr,
                                    double rank_tol = 1e-8);

// γ_F(X) = ¼(K_F(1−iJ)X·(1−iJ)X − |X|²) and the bound −|X|²/(2(1+s_F)).
cplx gamma_form(const Mat& F, const Vec& X);
double gamma_bound(const Mat& F, const Vec& X);

// Sign s with R̂(path1)R̂(path2) = s·R̂(path12).
int compose_sign(const SymplecticPath& path1, const SymplecticPath& path2,
                 const SymplecticPath& path12);

// ⟨φ_{z+X}| R̂(path1) R̂(path2) φ_z⟩ through exact coherent-state propagation.
cplx product_matrix_element(const SymplecticPath& path1, const SymplecticPath& path2,
                            const Vec& z, const Vec& X);

// t ↦ exp(tπJ)·diag(1+t, 1/(1+t)) on [0,1], ending at diag(−2, −1/2).
SymplecticPath det_negative_path(int nodes = 65);
// t ↦ exp(tJ)^{⊕n} on [0, t1].
SymplecticPath rotation_path(int n, double t1, int nodes = 65);

}  // namespace qhdyn
