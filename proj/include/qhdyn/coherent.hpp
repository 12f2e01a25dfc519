#pragma once

#include <vector>

#include "qhdyn/siegel.hpp"
#include "qhdyn/symcore.hpp"

namespace qhdyn {

// φ(x) = a·exp((i/ħ)(p·x − q·p/2))·exp((i/2ħ)Γ(x−q)·(x−q)), i.e. the Weyl
// translate T̂(z) of a·exp((i/2ħ)Γx·x).
struct GaussianState {
  int n = 1;
  double hbar = 1.0;
  PhasePoint z;
  SiegelPoint gamma;
  cplx a;

  // Positive real amplitude giving unit L² norm.
  static GaussianState squeezed(const PhasePoint& z, const SiegelPoint& gamma, double hbar = 1.0);
  static GaussianState coherent(const PhasePoint& z, double hbar = 1.0);
  static GaussianState ground(int n, double hbar = 1.0);

  PhasePoint q() const { return z.head(n); }
  PhasePoint p() const { return z.tail(n); }
  // Amplitude b in φ = b·exp((i/ħ)p·(x−q))·exp((i/2ħ)Γ(x−q)·(x−q)).
  cplx plain_amplitude() const;
  double norm() const;
};

// (πħ)^{−n/4} det(Im Γ)^{1/4}
double gaussian_normalization(const SiegelPoint& gamma, double hbar);

// Each column of xs is one position point in Rⁿ.
CVec wavefunction(const GaussianState& s, const Mat& xs);

struct TranslateComposition {
  cplx phase;
  PhasePoint center;
};
// T̂(z)T̂(z′) = exp((i/2ħ)σ(z,z′)) T̂(z+z′)
TranslateComposition translate_compose(const PhasePoint& z, const PhasePoint& zp, double hbar);

// ⟨s1|s2⟩, conjugate-linear in s1.
cplx overlap(const GaussianState& s1, const GaussianState& s2);

struct PropagateOptions {
  double max_arg_step = pi / 4;
  int max_depth = 40;
  // Mutation switch for the verification suite: principal square roots
  // instead of the continuously tracked branch.
  bool principal_branch = false;
};

// Exact image of s0 at every node of the path.
std::vector<GaussianState> propagate(const SymplecticPath& path, const GaussianState& s0,
                                     const PropagateOptions& opt = {});

struct RiccatiOptions {
  double max_step = 1e-3;
  int max_halvings = 20;
};

// Direct integration of Γ̇ = −G − LᵀΓ − ΓL − ΓKΓ; returns Γ at each requested
// time (times increasing, starting at or after t0).
std::vector<SiegelPoint> riccati_integrate(const QuadraticHamiltonian& H, const SiegelPoint& g0,
                                           double t0, const std::vector<double>& times,
                                           const RiccatiOptions& opt = {});
SiegelPoint riccati_integrate(const QuadraticHamiltonian& H, const SiegelPoint& g0, double t0,
                              double t1, const RiccatiOptions& opt = {});

// W(q,p) = ∫ e^{−iu·p/ħ} φ(q+u/2) conj φ(q−u/2) du; columns of pts are (q,p).
Vec wigner(const GaussianState& s, const Mat& pts);

}  // namespace qhdyn
