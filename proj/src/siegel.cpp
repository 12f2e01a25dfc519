#include "qhdyn/siegel.hpp"

#include "qhdyn/symcore.hpp"

namespace qhdyn {

MoebiusResult moebius(const Mat& F, const SiegelPoint& Z) {
  require(F.rows() == 2 * Z.rows() && Z.rows() == Z.cols(), "moebius: dimension mismatch");
  Blocks b = split_blocks(F);
  CMat E = b.A.cast<cplx>() + b.B.cast<cplx>() * Z;
  CMat N = b.C.cast<cplx>() + b.D.cast<cplx>() * Z;
  Eigen::JacobiSVD<CMat> svd(E);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 0 || s(0) / s(s.size() - 1) > 1e12)
    throw NumericalError("moebius: A + BZ is near singular (input outside Sp × Siegel space)");
  // N E⁻¹ = (E⁻ᵀ Nᵀ)ᵀ
  Eigen::PartialPivLU<CMat> lu(CMat(E.transpose()));
  CMat G = lu.solve(CMat(N.transpose())).transpose();
  return {symmetrize(G), lu.determinant()};
}

SiegelReport verify_siegel(const CMat& Z, double symmetry_tol, double eigen_tol) {
  SiegelReport r;
  if (Z.rows() != Z.cols() || Z.rows() == 0) return r;
  r.symmetry_residual = inf_norm(CMat(Z - Z.transpose()));
  r.min_imag_eigenvalue = min_eigenvalue(Mat(Z.imag()));
  r.pass = r.symmetry_residual <= symmetry_tol && r.min_imag_eigenvalue >= eigen_tol;
  return r;
}

}  // namespace qhdyn
