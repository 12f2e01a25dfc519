#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qhdyn {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

// Raised when a numerical precondition fails (near-singular solve, stalled
// refinement, escaped wavepacket treated as fatal).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mat expm(const Mat& A);
CMat expm(const CMat& A);

template <class M>
M symmetrize(const M& A) {
  return (A + A.transpose()) / 2.0;
}

double inf_norm(const Mat& A);
double inf_norm(const CMat& A);

// Angle equal to arg(w) modulo 2π that lies closest to `reference`.
double continue_arg(double reference, cplx w);

// det(P)^{-1/2} for complex symmetric P with positive definite real part,
// taken as the product of principal roots of the eigenvalues. This is the
// branch continuous on that convex set and positive on real SPD matrices.
cplx det_pow_minus_half_re_pos(const CMat& P);

// Minimum eigenvalue of a real symmetric matrix.
double min_eigenvalue(const Mat& S);
double max_eigenvalue(const Mat& S);

// Signature (positive minus negative eigenvalue count) of a real symmetric
// matrix, eigenvalues with |λ| ≤ tol·‖S‖ counted as zero.
int signature(const Mat& S, double tol = 1e-12);

// Orthonormal basis of the null space, singular values ≤ tol counted as zero.
Mat null_space(const Mat& A, double tol);
// Orthonormal basis of the column space, same rank rule.
Mat column_space(const Mat& A, double tol);
// Orthonormal basis of the orthogonal complement of span(B) in R^d.
Mat orthogonal_complement(const Mat& B, int d);

void require(bool cond, const std::string& what);

}  // namespace qhdyn
