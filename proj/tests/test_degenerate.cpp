#include "doctest.h"
#include "qhdyn/metaplectic.hpp"

using namespace qhdyn;

namespace {

const cplx I1(0, 1);

Mat shear(double t) { return (Mat(2, 2) << 1, t, 0, 1).finished(); }

// identity on (q₁, p₁), rotation by θ on (q₂, p₂)
Mat identity_plus_rotation(double theta) {
  Mat F = Mat::Identity(4, 4);
  F(1, 1) = F(3, 3) = std::cos(theta);
  F(1, 3) = std::sin(theta);
  F(3, 1) = -std::sin(theta);
  return F;
}

}  // namespace

TEST_CASE("regularized matrices are symplectic without eigenvalue one") {
  for (const Mat& F : {shear(1.0), Mat(Mat::Identity(2, 2)), identity_plus_rotation(0.8)}) {
    const Eigen::Index d = F.rows();
    double prev = 1e300;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      Mat Fe = regularize_eigenvalue_one(F, eps);
      CHECK(symplectic_residual(Fe) < 1e-12);
      Eigen::JacobiSVD<Mat> svd(Mat(Mat::Identity(d, d) - Fe));
      CHECK(svd.singularValues().minCoeff() > 0.1 * eps);
      double dist = (Fe - F).norm();
      CHECK(dist < prev);
      prev = dist;
    }
    CHECK(prev < 1e-2);
  }
}

TEST_CASE("identity: pure Dirac symbol") {
  MetaplecticBranch b = metaplectic_branch(SymplecticPath::constant(Mat::Identity(2, 2)));
  DegenerateReport rep;
  GaussianSymbol D = degenerate_covariant(b, &rep);
  CHECK(std::abs(D.c - 2 * pi) < 1e-6);
  CHECK(rep.dirac_dim == 2);
  CHECK(rep.eigenspace_dim == 2);
  REQUIRE(D.dirac);
  CHECK(D.dirac->support.cols() == 0);
  CHECK(D.dim() == 0);
}

TEST_CASE("shear: Dirac in momentum, Gaussian in position") {
  SymplecticPath path = SymplecticPath::from_function(shear, 0, 1, 33);
  DegenerateReport rep;
  GaussianSymbol D = degenerate_covariant(metaplectic_branch(path), &rep);
  CHECK(std::abs(D.c - std::sqrt(2 * pi) * std::exp(-I1 * pi / 4.0)) < 1e-6);
  CHECK(rep.dirac_dim == 1);
  REQUIRE(D.dirac);
  CHECK(std::abs(std::abs(D.dirac->normal(1, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(D.M(0, 0) - 0.5) < 1e-6);
  CHECK(rep.convergence < 1e-2);
}

TEST_CASE("identity block times a rotation") {
  const double theta = 1.1;
  SymplecticPath path =
      SymplecticPath::from_function([theta](double t) { return identity_plus_rotation(t * theta); }, 0, 1, 33);
  DegenerateReport rep;
  GaussianSymbol D = degenerate_covariant(metaplectic_branch(path), &rep);
  GaussianSymbol R = covariant_symbol(metaplectic_branch(rotation_path(1, theta)));
  CHECK(rep.dirac_dim == 2);
  CHECK(std::abs(D.c - 2 * pi * R.c) < 1e-6 * std::abs(R.c));
  // compare M on the support in ambient coordinates (q₂, p₂)
  REQUIRE(D.dirac);
  Mat S = D.dirac->support;
  Mat ambient = S * D.M.real() * S.transpose();
  Mat sub(2, 2);
  sub << ambient(1, 1), ambient(1, 3), ambient(3, 1), ambient(3, 3);
  CHECK((sub - R.M.real()).norm() < 1e-6);
}

TEST_CASE("eigenvalue one near the rank threshold is refused") {
  MetaplecticBranch b = metaplectic_branch(rotation_path(1, 3e-8));
  CHECK_THROWS_AS(degenerate_covariant(b), NumericalError);
}

TEST_CASE("no eigenvalue one") {
  MetaplecticBranch b = metaplectic_branch(rotation_path(1, 1.0));
  CHECK_THROWS_AS(degenerate_covariant(b), std::invalid_argument);
}
