#include <random>

#include "doctest.h"
#include "qhdyn/siegel.hpp"
#include "qhdyn/symcore.hpp"

using namespace qhdyn;

namespace {

const cplx I1(0, 1);

CMat random_siegel(int n, std::mt19937_64& rng) {
  Mat Y = random_symmetric(n, rng, 0.5);
  Y = Y * Y.transpose() + 0.3 * Mat::Identity(n, n);
  return random_symmetric(n, rng, 0.5).cast<cplx>() + I1 * Y.cast<cplx>();
}

}  // namespace

TEST_CASE("identity acts trivially") {
  std::mt19937_64 rng(1);
  CMat Z = random_siegel(2, rng);
  MoebiusResult r = moebius(Mat::Identity(4, 4), Z);
  CHECK((r.gamma - Z).norm() < 1e-14);
  CHECK(std::abs(r.det - 1.0) < 1e-14);
}

TEST_CASE("rotations fix iI") {
  MoebiusResult r = moebius(rotation(1.1), CMat::Identity(1, 1) * I1);
  CHECK(std::abs(r.gamma(0, 0) - I1) < 1e-14);
  CHECK(std::abs(r.det - std::exp(I1 * 1.1)) < 1e-14);
}

TEST_CASE("free particle image of iI") {
  double t = 1.0;
  Mat F = (Mat(2, 2) << 1, t, 0, 1).finished();
  cplx g = moebius(F, CMat::Identity(1, 1) * I1).gamma(0, 0);
  CHECK(std::abs(g - (t + I1) / (1 + t * t)) < 1e-14);
}

TEST_CASE("the action is a group action") {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 3; ++n) {
    Mat F1 = random_symplectic(n, rng), F2 = random_symplectic(n, rng);
    CMat Z = random_siegel(n, rng);
    MoebiusResult a = moebius(F1 * F2, Z);
    MoebiusResult b = moebius(F1, moebius(F2, Z).gamma);
    CHECK((a.gamma - b.gamma).norm() < 1e-11);
    // det(A+BZ) is a cocycle
    CHECK(std::abs(a.det - moebius(F1, moebius(F2, Z).gamma).det * moebius(F2, Z).det) <
          1e-10 * std::abs(a.det));
  }
}

TEST_CASE("images stay in the Siegel space") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    int n = 1 + k % 3;
    CMat g = moebius(random_symplectic(n, rng, 1.0), random_siegel(n, rng)).gamma;
    CHECK(verify_siegel(g).pass);
  }
}

TEST_CASE("verification rejects non-Siegel matrices") {
  CMat Z(2, 2);
  Z << I1, 0.1, 0.2, I1;
  CHECK_FALSE(verify_siegel(Z).pass);
  CMat W = -I1 * CMat::Identity(2, 2);
  CHECK_FALSE(verify_siegel(W).pass);
  CHECK(verify_siegel(W).min_imag_eigenvalue < 0);
}

TEST_CASE("singular A + BZ is reported") {
  Mat J = standard_symplectic_form(1);
  CHECK_THROWS_AS(moebius(J, CMat::Zero(1, 1)), NumericalError);
}
