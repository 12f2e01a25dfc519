#include <random>

#include "doctest.h"
#include "qhdyn/io.hpp"
#include "qhdyn/metaplectic.hpp"

using namespace qhdyn;

namespace {

const cplx I1(0, 1);

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

// t ↦ exp(−tπJ)·diag(1+t, 1/(1+t)), the mirror image of det_negative_path
SymplecticPath mirrored_negative_path() {
  return SymplecticPath::from_function(
      [](double t) {
        Mat D = Mat::Zero(2, 2);
        D(0, 0) = 1 + t;
        D(1, 1) = 1 / (1 + t);
        return Mat(rotation(-pi * t) * D);
      },
      0.0, 1.0, 65);
}

}  // namespace

TEST_CASE("delta at the identity") {
  auto M0 = HamiltonianComplexMatrix::regularizer(2, 0.3);
  CHECK(std::abs(delta_det(Mat::Identity(4, 4), M0.calM) - 1.0) < 1e-15);
  M0.validate();
  CHECK((M0.M() - 0.3 * I1 * CMat::Identity(4, 4)).norm() < 1e-15);
}

TEST_CASE("symbol evolution under the zero Hamiltonian is constant") {
  auto M0 = HamiltonianComplexMatrix::regularizer(1, 0.5);
  auto nodes = symbol_evolution(QuadraticHamiltonian::zero(1), M0, 0.0, 2.0);
  for (const SymbolNode& s : nodes) {
    CHECK(std::abs(s.symbol.c - 1.0) < 1e-14);
    CHECK((s.symbol.M - M0.M()).norm() < 1e-14);
  }
}

TEST_CASE("closed-form symbol evolution agrees with the ODE") {
  auto M0 = HamiltonianComplexMatrix::regularizer(1, 0.4);
  for (const auto& H : {QuadraticHamiltonian::harmonic(1), QuadraticHamiltonian::inverted(1),
                        QuadraticHamiltonian::free_particle(1)}) {
    SymbolNode a = symbol_evolution(H, M0, 0.0, 1.5).back();
    SymbolNode b = symbol_evolution_ode(H, M0, 0.0, 1.5, 400);
    CHECK(std::abs(a.symbol.c - b.symbol.c) < 1e-8);
    CHECK((a.symbol.M - b.symbol.M).norm() < 1e-8);
  }
}

TEST_CASE("index of the loop, quarter turn and negative-determinant path") {
  IndexResult loop = cz_index(rotation_path(1, 2 * pi));
  CHECK(loop.nu == 1.0);
  CHECK_FALSE(loop.half_integer);
  CHECK(cz_index(rotation_path(1, pi / 2)).nu == 0.0);
  IndexResult h = cz_index(det_negative_path());
  CHECK(h.half_integer);
  CHECK(h.nu == 0.5);
  CHECK(h.limit == doctest::Approx(pi).epsilon(1e-6));
  CHECK(h.det_one_plus_F < 0);
}

TEST_CASE("mirrored negative-determinant path") {
  IndexResult h = cz_index(mirrored_negative_path());
  CHECK(h.nu == -0.5);
  CHECK(h.limit == doctest::Approx(-pi).epsilon(1e-6));
}

TEST_CASE("index does not depend on the mesh") {
  for (double t1 : {1.0, 4.0, 2 * pi, 9.0})
    CHECK(cz_index(rotation_path(1, t1, 9)).nu == cz_index(rotation_path(1, t1, 129)).nu);
  CHECK(cz_index(rotation_path(2, 2 * pi)).nu == 2.0);
}

TEST_CASE("index parity follows the sign of det(1+F)") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 12; ++k) {
    int n = 1 + k % 2;
    SymplecticPath p = polar_symplectic_path(random_symplectic(n, rng, 1.2));
    Mat F = p.back();
    double d = Mat(Mat::Identity(2 * n, 2 * n) + F).determinant();
    if (std::abs(d) < 1e-2) continue;
    IndexResult r = cz_index(p);
    double frac = std::abs(r.nu - std::floor(r.nu));
    CHECK(frac == (d > 0 ? 0.0 : 0.5));
    // appending a full oscillator loop in each plane adds n
    SymplecticPath looped = p.then(rotation_path(n, 2 * pi));
    CHECK(cz_index(looped).nu == r.nu + n);
  }
}

TEST_CASE("contravariant symbol of the identity and of rotations") {
  GaussianSymbol id = mw_contravariant(Mat::Identity(2, 2), 0);
  CHECK(std::abs(id.c - 1.0) < 1e-15);
  CHECK(id.M.norm() < 1e-15);
  for (double t : {0.4, 1.3, 2.5}) {
    GaussianSymbol R = mw_contravariant(rotation(t), 0);
    CHECK(std::abs(R.c - 2.0 / (2 * std::cos(t / 2))) < 1e-13);
    CHECK((R.M + std::tan(t / 2) * CMat::Identity(2, 2)).norm() < 1e-12);
  }
  GaussianSymbol h = mw_contravariant(rotation(1.0), 1);
  CHECK(std::abs(h.c + 2.0 / (2 * std::cos(0.5))) < 1e-13);
}

TEST_CASE("regularized symbols approach the contravariant symbol") {
  SymplecticPath p = rotation_path(1, 1.0);
  GaussianSymbol R = mw_contravariant(p.back(), cz_index(p).nu);
  double prev = 1e300;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    GaussianSymbol Re = regularized_contravariant(p, eps);
    double err = std::abs(Re.c - R.c) + (Re.M - R.M).norm();
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("matrix elements at the identity and the quarter turn") {
  MetaplecticBranch id = metaplectic_branch(SymplecticPath::constant(Mat::Identity(2, 2)));
  Vec z = vec2(0.3, -0.7), X = vec2(0.5, 0.2);
  CHECK(std::abs(matrix_element(id, z, Vec::Zero(2)) - 1.0) < 1e-14);
  CHECK(std::abs(std::abs(matrix_element(id, z, X)) - std::exp(-X.squaredNorm() / 4)) < 1e-14);
  CHECK(std::abs(matrix_element(id, Vec::Zero(2), X) - std::exp(-X.squaredNorm() / 4)) < 1e-14);
  MetaplecticBranch q = metaplectic_branch(rotation_path(1, pi / 2));
  CHECK(std::abs(matrix_element(q, Vec::Zero(2), Vec::Zero(2)) - std::exp(-I1 * pi / 4.0)) < 1e-13);
}

TEST_CASE("matrix elements equal coherent-state overlaps") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 8; ++k) {
    int n = 1 + k % 2;
    auto H = QuadraticHamiltonian::from_S(random_symmetric(2 * n, rng, 0.7));
    SymplecticPath p = flow(H, 0.0, 2.0);
    Vec z(2 * n), X(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      z(i) = U(rng);
      X(i) = U(rng);
    }
    GaussianState sz = propagate(p, GaussianState::coherent(z)).back();
    cplx ref = overlap(GaussianState::coherent(Vec(z + X)), sz);
    CHECK(std::abs(matrix_element(metaplectic_branch(p), z, X) - ref) < 1e-10);
  }
}

TEST_CASE("covariant symbols of the half turn and rotations") {
  GaussianSymbol h = covariant_symbol(metaplectic_branch(rotation_path(1, pi)));
  CHECK(std::abs(h.c + 0.5 * I1) < 1e-12);
  CHECK(h.phase_index == doctest::Approx(-0.5));
  for (double t : {0.5, 2.0, 4.0}) {
    GaussianSymbol C = covariant_symbol(metaplectic_branch(rotation_path(1, t)));
    CHECK(std::abs(C.c + I1 / (2 * std::sin(t / 2))) < 1e-12);
    CHECK((C.M - CMat::Identity(2, 2) / (4 * std::tan(t / 2))).norm() < 1e-12);
  }
}

TEST_CASE("covariant symbol rejects eigenvalue one") {
  MetaplecticBranch b = metaplectic_branch(SymplecticPath::constant(Mat::Identity(2, 2)));
  CHECK_THROWS(covariant_symbol(b));
}

TEST_CASE("gamma form and its bound") {
  Vec X = vec2(0.6, -1.1);
  CHECK(std::abs(gamma_form(Mat::Identity(2, 2), X) + X.squaredNorm() / 4) < 1e-15);
  CHECK(gamma_bound(Mat::Identity(2, 2), X) == doctest::Approx(-X.squaredNorm() / 4));
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    Mat F = random_symplectic(1 + k % 2, rng, 1.0);
    Vec Y = Vec::LinSpaced(F.rows(), -1, 0.7);
    CHECK(gamma_form(F, Y).real() <= gamma_bound(F, Y) + 1e-12);
  }
}

TEST_CASE("composition signs") {
  SymplecticPath idp = SymplecticPath::constant(Mat::Identity(2, 2));
  CHECK(compose_sign(idp, idp, idp) == 1);
  SymplecticPath half = rotation_path(1, pi);
  CHECK(compose_sign(half, half, idp) == -1);
  CHECK(compose_sign(half, half, rotation_path(1, 2 * pi)) == 1);
  CHECK_THROWS(compose_sign(half, idp, idp));
}

TEST_CASE("pairing a Gaussian symbol in closed form") {
  GaussianSymbol R{cplx(0.7, 0.2), CMat::Identity(2, 2) * cplx(0.3, 0.1), 0.0, std::nullopt};
  Mat W = (Mat(2, 2) << 2.0, 0.3, 0.3, 1.5).finished();
  Vec z0 = vec2(0.2, -0.1);
  const int N = 401;
  const double L = 16, h = L / (N - 1);
  cplx acc = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Vec z = vec2(-L / 2 + i * h, -L / 2 + j * h);
      Vec d = z - z0;
      acc += R(z) * std::exp(-0.5 * d.dot(W * d));
    }
  CHECK(std::abs(acc * h * h - pair_with_gaussian(R, W, z0)) < 1e-10);
}

TEST_CASE("JSON output of index results and symbols") {
  json j = to_json(cz_index(rotation_path(1, 2 * pi)));
  for (const char* k : {"nu", "limit", "det_one_plus_F", "half_integer", "epsilons", "raw", "samples"})
    CHECK(j.contains(k));
  CHECK(j["nu"].get<double>() == 1.0);
  json s = to_json(mw_contravariant(rotation(0.5), 0));
  for (const char* k : {"c", "M_re", "M_im", "phase_index"}) CHECK(s.contains(k));
}
