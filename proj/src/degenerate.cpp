#include <cmath>
#include <sstream>

#include "qhdyn/metaplectic.hpp"

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

// Regularization schedule for the symbol-level limit; linear in ε.
constexpr double kEpsCoarse = 1e-4;
constexpr double kEpsFine = 1e-5;

// Columns (e₁…e_m, f₁…f_m) spanning the same symplectic subspace as V with
// BᵀJB = J_m.
Mat symplectic_basis(const Mat& V, const Mat& J) {
  std::vector<Vec> rest;
  for (Eigen::Index k = 0; k < V.cols(); ++k) rest.push_back(V.col(k));
  std::vector<Vec> es, fs;
  while (!rest.empty()) {
    Vec e = rest.front() / rest.front().norm();
    rest.erase(rest.begin());
    std::size_t best = 0;
    double best_s = 0;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      double s = e.dot(J * rest[j]);
      if (std::abs(s) > std::abs(best_s)) best_s = s, best = j;
    }
    if (std::abs(best_s) < 1e-10)
      throw NumericalError("degenerate: eigenvalue-one subspace is not symplectic");
    Vec f = rest[best] / best_s;  // eᵀJf = 1
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    for (Vec& v : rest) {
      double a = f.dot(J * v), b = -e.dot(J * v);
      v += a * e + b * f;
    }
    es.push_back(e);
    fs.push_back(f);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(es.size());
  Mat B(V.rows(), 2 * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    B.col(k) = es[k];
    B.col(m + k) = fs[k];
  }
  return B;
}

struct Splitting {
  Mat E1;  // symplectic basis of ∪ker(1−F)ʲ
  Mat E2;  // basis of its symplectic orthogonal
  Mat F1;  // F restricted to span(E1), in that basis
  std::vector<int> candidate_ranks;
};

Splitting split_eigenvalue_one(const Mat& F, double rank_tol) {
  const Eigen::Index d = F.rows();
  const int n = static_cast<int>(d / 2);
  Mat J = standard_symplectic_form(n);
  Mat I = Mat::Identity(d, d);
  const double tol = rank_tol * std::max(1.0, inf_norm(F));
  Splitting sp;
  {
    Eigen::JacobiSVD<Mat> svd(I - F);
    const Vec& s = svd.singularValues();
    int rank = 0, loose = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > tol) ++rank;
      if (s(k) > 10 * tol) ++loose;
    }
    int strict = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > tol / 10) ++strict;
    sp.candidate_ranks = {rank};
    if (strict != loose) {
      std::ostringstream msg;
      msg << "degenerate: singular values of 1−F straddle the rank threshold; candidate ranks "
          << loose << " and " << strict;
      throw NumericalError(msg.str());
    }
  }
  Mat P = I;
  Eigen::Index dim = 0;
  Mat K;
  for (Eigen::Index j = 1; j <= d; ++j) {
    P = P * (I - F);
    K = null_space(P, tol);
    if (K.cols() == dim) break;
    dim = K.cols();
  }
  if (K.cols() == 0) return sp;
  if (K.cols() % 2 != 0)
    throw NumericalError("degenerate: eigenvalue-one subspace has odd dimension");
  sp.E1 = symplectic_basis(K, J);
  sp.E2 = null_space(Mat(sp.E1.transpose() * J), 1e-10);
  Mat B(d, d);
  B << sp.E1, sp.E2;
  Mat FB = B.partialPivLu().solve(F * B);
  const Eigen::Index k = sp.E1.cols();
  if (d > k) {
    double off = std::max(FB.topRightCorner(k, d - k).cwiseAbs().maxCoeff(),
                          FB.bottomLeftCorner(d - k, k).cwiseAbs().maxCoeff());
    if (off > 1e-8 * std::max(1.0, inf_norm(FB)))
      throw NumericalError("degenerate: F does not preserve the eigenvalue-one splitting");
  }
  sp.F1 = FB.topLeftCorner(k, k);
  return sp;
}

Mat regularize_with(const Mat& F, const Splitting& sp, double eps) {
  const Eigen::Index d = F.rows(), k = sp.E1.cols();
  if (k == 0) return F;
  Mat Ik = Mat::Identity(k, k);
  Mat Jk = standard_symplectic_form(static_cast<int>(k / 2));
  Mat L = (Ik - sp.F1) * (Ik + sp.F1).inverse();
  Mat Le = L - eps * Jk;
  Mat F1e = (Ik - Le) * (Ik + Le).inverse();
  Mat B(d, d);
  B << sp.E1, sp.E2;
  Mat FB = B.partialPivLu().solve(F * B);
  FB.topLeftCorner(k, k) = F1e;
  FB.topRightCorner(k, d - k).setZero();
  FB.bottomLeftCorner(d - k, k).setZero();
  return B * FB * B.inverse();
}

struct LimitSample {
  cplx c;
  Mat M;
  int sg;
};

}  // namespace

Mat regularize_eigenvalue_one(const Mat& F, double eps, double rank_tol) {
  require(eps > 0, "regularize_eigenvalue_one: ε must be positive");
  return regularize_with(F, split_eigenvalue_one(F, rank_tol), eps);
}

GaussianSymbol degenerate_covariant(const MetaplecticBranch& b, DegenerateReport* report,
                                    double rank_tol) {
  const Mat& F = b.F;
  const int n = static_cast<int>(F.rows() / 2);
  const Eigen::Index d = 2 * n;
  Splitting sp = split_eigenvalue_one(F, rank_tol);
  const Eigen::Index k = sp.E1.cols();
  if (k == 0)
    throw std::invalid_argument("degenerate_covariant: 1 is not an eigenvalue of F");
  const double tol = rank_tol * std::max(1.0, inf_norm(F));
  Mat I = Mat::Identity(d, d);
  Mat image = column_space(Mat((F - I) * sp.E1), tol);
  Mat spanning(d, image.cols() + sp.E2.cols());
  spanning << image, sp.E2;
  Mat support = spanning.cols() ? column_space(spanning, 1e-10) : Mat(d, 0);
  Mat normal = orthogonal_complement(support, static_cast<int>(d));
  const Eigen::Index d1 = normal.cols();

  auto sample = [&](double eps) {
    Mat Fe = regularize_with(F, sp, eps);
    GaussianSymbol s = covariant_symbol(continue_branch(b, Fe));
    Mat M = s.M.real();
    Mat Mnn = normal.transpose() * M * normal;
    Mat Mnw = normal.transpose() * M * support;
    Mat Mww = support.transpose() * M * support;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(Mnn), Eigen::EigenvaluesOnly);
    cplx factor = std::pow(pi, d1 / 2.0);
    int sg = 0;
    for (Eigen::Index j = 0; j < d1; ++j) {
      double lam = es.eigenvalues()(j);
      sg += lam > 0 ? 1 : -1;
      factor *= std::exp(I1 * pi * (lam > 0 ? 0.25 : -0.25)) / std::sqrt(std::abs(lam));
    }
    Mat schur = Mww - Mnw.transpose() * Mnn.partialPivLu().solve(Mnw);
    return LimitSample{s.c * factor, symmetrize(schur), sg};
  };
  LimitSample a = sample(kEpsCoarse), f = sample(kEpsFine);
  if (a.sg != f.sg)
    throw NumericalError("degenerate_covariant: signature of the divergent block is unstable");
  const double q = kEpsCoarse / kEpsFine;
  cplx c0 = (q * f.c - a.c) / (q - 1);
  Mat M0 = (q * f.M - a.M) / (q - 1);
  if (report) {
    report->eigenspace_dim = static_cast<int>(k);
    report->dirac_dim = static_cast<int>(d1);
    report->candidate_ranks = sp.candidate_ranks;
    report->signature_Q = f.sg;
    double mscale = std::max(1.0, f.M.size() ? f.M.cwiseAbs().maxCoeff() : 0.0);
    report->convergence = std::max(std::abs(f.c - a.c) / std::max(1e-300, std::abs(c0)),
                                   f.M.size() ? (f.M - a.M).cwiseAbs().maxCoeff() / mscale : 0.0);
  }
  return {c0, M0.cast<cplx>(), std::arg(c0) / pi, DiracDecoration{normal, support}};
}

}  // namespace qhdyn
