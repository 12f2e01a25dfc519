#include <random>

#include "doctest.h"
#include "qhdyn/symcore.hpp"

using namespace qhdyn;

namespace {

Mat shear(double t) { return (Mat(2, 2) << 1, t, 0, 1).finished(); }

}  // namespace

TEST_CASE("standard form and sigma") {
  Mat J = standard_symplectic_form(2);
  CHECK((J * J + Mat::Identity(4, 4)).norm() < 1e-15);
  CHECK((J + J.transpose()).norm() < 1e-15);
  Vec X = (Vec(2) << 1.0, 0.0).finished(), Y = (Vec(2) << 0.0, 1.0).finished();
  // σ(z, z′) = pq′ − qp′
  CHECK(sigma(X, Y) == doctest::Approx(-1.0));
  CHECK(sigma(Y, X) == doctest::Approx(1.0));
}

TEST_CASE("rotation is exp(θJ)") {
  Mat R = rotation(0.7);
  CHECK(R(0, 0) == doctest::Approx(std::cos(0.7)));
  CHECK(R(0, 1) == doctest::Approx(std::sin(0.7)));
  CHECK(R(1, 0) == doctest::Approx(-std::sin(0.7)));
  CHECK(symplectic_residual(R) < 1e-14);
}

TEST_CASE("harmonic flow equals rotation") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 2.0);
  CHECK((p.back() - rotation(2.0)).norm() < 1e-12);
  CHECK(p.front().isIdentity(1e-15));
}

TEST_CASE("free particle flow is a shear") {
  SymplecticPath p = flow(QuadraticHamiltonian::free_particle(1), 0.0, 1.5);
  CHECK((p.back() - shear(1.5)).norm() < 1e-12);
}

TEST_CASE("zero Hamiltonian flow is the identity") {
  SymplecticPath p = flow(QuadraticHamiltonian::zero(2), 0.0, 3.0);
  for (const Mat& F : p.matrices()) CHECK(F.isIdentity(1e-15));
}

TEST_CASE("random constant flows stay symplectic") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    int n = 1 + k % 3;
    auto H = QuadraticHamiltonian::from_S(random_symmetric(2 * n, rng, 0.5));
    SymplecticPath p = flow(H, 0.0, 2 * pi);
    for (const Mat& F : p.matrices())
      CHECK(symplectic_residual(F) <= 1e-9 * std::max(1.0, F.squaredNorm()));
  }
}

TEST_CASE("autonomous flows compose and have unit determinant") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 3; ++n) {
    auto H = QuadraticHamiltonian::from_S(random_symmetric(2 * n, rng, 0.6));
    Mat F02 = flow(H, 0.0, 2.0).back();
    Mat F01 = flow(H, 0.0, 1.2).back(), F12 = flow(H, 1.2, 2.0).back();
    CHECK((F12 * F01 - F02).norm() < 1e-8 * std::max(1.0, F02.norm()));
    SymplecticPath p = flow(H, 0.0, 2.0);
    for (const Mat& F : p.matrices()) CHECK(std::abs(F.determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("piecewise flow is the ordered product of exponentials") {
  Mat I = Mat::Identity(1, 1), Z = Mat::Zero(1, 1);
  auto H = QuadraticHamiltonian::piecewise({0.0, 1.0}, {{I, Z, I}, {Z, Z, I}});
  SymplecticPath p = flow(H, 0.0, 2.5);
  Mat expected = shear(1.5) * rotation(1.0);
  CHECK((p.back() - expected).norm() < 1e-11);
}

TEST_CASE("callable flow agrees with the closed form") {
  std::mt19937_64 rng(5);
  Mat S = random_symmetric(2, rng, 0.7);
  auto Hc = QuadraticHamiltonian::from_S(S);
  HamiltonianBlocks b = Hc.blocks(0.0);
  auto Hf = QuadraticHamiltonian::callable(1, [b](double) { return b; });
  Mat a = flow(Hc, 0.0, 1.7).back(), c = flow(Hf, 0.0, 1.7).back();
  CHECK((a - c).norm() < 1e-9);
}

TEST_CASE("time-dependent flow satisfies the variational equation") {
  auto H = QuadraticHamiltonian::callable(1, [](double t) {
    return HamiltonianBlocks{Mat::Constant(1, 1, 1.0 + 0.5 * std::sin(t)), Mat::Constant(1, 1, 0.2),
                             Mat::Constant(1, 1, 1.0)};
  });
  SymplecticPath p = flow(H, 0.0, 3.0);
  Mat J = standard_symplectic_form(1);
  const double h = 1e-5, t = 1.3;
  Mat Fd = (p.evaluate(t + h) - p.evaluate(t - h)) / (2 * h);
  CHECK((Fd - J * H.S(t) * p.evaluate(t)).norm() < 1e-6);
  CHECK(symplectic_residual(p.back()) < 1e-9);
}

TEST_CASE("block validation rejects asymmetric G") {
  Mat G = (Mat(2, 2) << 1, 2, 0, 1).finished();
  CHECK_THROWS_AS(QuadraticHamiltonian::constant(G, Mat::Zero(2, 2), Mat::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("reprojection restores the symplectic condition") {
  Mat F = rotation(0.4);
  F(0, 0) += 1e-6;
  CHECK(symplectic_residual(F) > 1e-7);
  Mat P = reproject(F);
  CHECK(symplectic_residual(P) < 1e-13);
  CHECK((P - F).norm() < 1e-5);
}

TEST_CASE("path mesh keeps the argument steps small") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 20.0, FlowOptions{.nodes = 3});
  for (std::size_t k = 1; k < p.size(); ++k)
    CHECK(std::abs(p.arg_det()[k] - p.arg_det()[k - 1]) < pi / 4);
  // arg det(A + iB) = t for the oscillator
  CHECK(p.arg_det().back() == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("concatenated path ends at the product") {
  SymplecticPath a = SymplecticPath::from_function(shear, 0, 1, 5);
  SymplecticPath b = SymplecticPath::from_function(rotation, 0, 1, 5);
  SymplecticPath c = a.then(b);
  CHECK((c.back() - rotation(1) * shear(1)).norm() < 1e-13);
  CHECK(c.front().isIdentity(1e-15));
}

TEST_CASE("classical trajectory of the oscillator is a circle") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 2.0);
  Vec z = (Vec(2) << 1.0, 0.0).finished();
  auto traj = classical_trajectory(p, z);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    double t = p.times()[k];
    CHECK(traj[k](0) == doctest::Approx(std::cos(t)));
    CHECK(traj[k](1) == doctest::Approx(-std::sin(t)));
  }
}

TEST_CASE("energy is conserved along autonomous trajectories") {
  std::mt19937_64 rng(3);
  auto H = QuadraticHamiltonian::from_S(random_symmetric(4, rng, 0.5));
  Vec z = Vec::LinSpaced(4, -1, 1);
  SymplecticPath p = flow(H, 0.0, 3.0);
  double e0 = H.energy(0.0, z);
  for (const Vec& zt : classical_trajectory(p, z)) CHECK(H.energy(0.0, zt) == doctest::Approx(e0).epsilon(1e-9));
}

TEST_CASE("polar path joins the identity to F") {
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 3; ++n) {
    Mat F = random_symplectic(n, rng, 0.8);
    CHECK(polar_path(F, 0.0).isIdentity(1e-12));
    CHECK((polar_path(F, 1.0) - F).norm() < 1e-10 * F.norm());
    CHECK(symplectic_residual(polar_path(F, 0.37)) < 1e-10);
  }
}

TEST_CASE("polar path through a negative-determinant endpoint") {
  Mat F = (Mat(2, 2) << -2, 0, 0, -0.5).finished();
  CHECK((polar_path(F, 1.0) - F).norm() < 1e-12);
}
