#pragma once

#include "qhdyn/linalg.hpp"

namespace qhdyn {

// Complex symmetric n×n matrix with positive definite imaginary part.
using SiegelPoint = CMat;

struct MoebiusResult {
  SiegelPoint gamma;  // (C + DZ)(A + BZ)⁻¹, symmetrized
  cplx det;           // det(A + BZ), for branch tracking by callers
};

// Throws NumericalError when A + BZ has condition number above 1e12.
MoebiusResult moebius(const Mat& F, const SiegelPoint& Z);

struct SiegelReport {
  double symmetry_residual = 0;
  double min_imag_eigenvalue = 0;
  bool pass = false;
};

SiegelReport verify_siegel(const CMat& Z, double symmetry_tol = 1e-10,
                           double eigen_tol = 1e-12);

}  // namespace qhdyn
