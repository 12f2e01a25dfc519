#include "qhdyn/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace qhdyn {

Mat expm(const Mat& A) { return A.exp(); }
CMat expm(const CMat& A) { return A.exp(); }

double inf_norm(const Mat& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const CMat& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff();
}

double continue_arg(double reference, cplx w) {
  double a = std::arg(w);
  double k = std::round((reference - a) / (2 * pi));
  return a + 2 * pi * k;
}

cplx det_pow_minus_half_re_pos(const CMat& P) {
  Eigen::ComplexEigenSolver<CMat> es(P, false);
  require(es.info() == Eigen::Success, "eigen solver failed in det^{-1/2}");
  cplx r = 1.0;
  for (Eigen::Index k = 0; k < P.rows(); ++k) r /= std::sqrt(es.eigenvalues()(k));
  return r;
}

double min_eigenvalue(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

int signature(const Mat& S, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(S), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  int sg = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > tol * scale) ++sg;
    if (ev(k) < -tol * scale) --sg;
  }
  return sg;
}

Mat null_space(const Mat& A, double tol) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

Mat column_space(const Mat& A, double tol) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU);
  const Vec& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

Mat orthogonal_complement(const Mat& B, int d) {
  if (B.cols() == 0) return Mat::Identity(d, d);
  return null_space(B.transpose(), 1e-10);
}

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace qhdyn
