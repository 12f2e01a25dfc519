#include <random>

#include "doctest.h"
#include "qhdyn/coherent.hpp"

using namespace qhdyn;

namespace {

const cplx I1(0, 1);

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

// ∫ conj(f) g on a fine uniform grid
cplx quad_overlap(const GaussianState& a, const GaussianState& b, double L = 24, int N = 4001) {
  Mat xs(1, N);
  for (int j = 0; j < N; ++j) xs(0, j) = -L / 2 + L * j / (N - 1);
  CVec fa = wavefunction(a, xs), fb = wavefunction(b, xs);
  return fa.dot(fb) * (L / (N - 1));
}

}  // namespace

TEST_CASE("ground state normalization") {
  GaussianState g = GaussianState::ground(1);
  CHECK(g.a.real() == doctest::Approx(std::pow(pi, -0.25)));
  CHECK(std::abs(quad_overlap(g, g) - 1.0) < 1e-12);
  GaussianState h = GaussianState::ground(1, 0.5);
  CHECK(std::abs(quad_overlap(h, h) - 1.0) < 1e-12);
}

TEST_CASE("squeezed state normalization in two dimensions") {
  CMat G(2, 2);
  G << cplx(0.3, 1.2), cplx(0.1, 0.2), cplx(0.1, 0.2), cplx(-0.4, 0.8);
  GaussianState s = GaussianState::squeezed(Vec::Zero(4), G);
  CHECK(s.norm() == doctest::Approx(1.0));
  CHECK(std::abs(overlap(s, s) - 1.0) < 1e-13);
}

TEST_CASE("coherent overlap with the ground state") {
  Vec z = vec2(0.8, -0.5);
  cplx v = overlap(GaussianState::coherent(z), GaussianState::ground(1));
  CHECK(std::abs(v) == doctest::Approx(std::exp(-z.squaredNorm() / 4)));
  CHECK(std::abs(v - quad_overlap(GaussianState::coherent(z), GaussianState::ground(1))) < 1e-12);
}

TEST_CASE("closed-form overlap matches quadrature") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    std::uniform_real_distribution<double> U(-1, 1);
    CMat g1 = CMat::Constant(1, 1, cplx(U(rng), 1 + 0.5 * U(rng)));
    CMat g2 = CMat::Constant(1, 1, cplx(U(rng), 1 + 0.5 * U(rng)));
    GaussianState a = GaussianState::squeezed(vec2(U(rng), U(rng)), g1, 0.7);
    GaussianState b = GaussianState::squeezed(vec2(U(rng), U(rng)), g2, 0.7);
    CHECK(std::abs(overlap(a, b) - quad_overlap(a, b)) < 1e-10);
  }
}

TEST_CASE("translate composition phase") {
  Vec z = vec2(1.0, 0.0), w = vec2(0.0, 1.0);
  TranslateComposition c = translate_compose(z, w, 1.0);
  CHECK(std::abs(c.phase - std::exp(0.5 * I1 * sigma(z, w))) < 1e-15);
  CHECK((c.center - vec2(1, 1)).norm() < 1e-15);
}

TEST_CASE("oscillator ground state returns with phase −1 after 2π") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 2 * pi);
  GaussianState s0 = GaussianState::ground(1);
  GaussianState s = propagate(p, s0).back();
  CHECK(std::abs(s.a + s0.a) < 1e-12);
  CHECK(std::abs(s.gamma(0, 0) - I1) < 1e-12);
  CHECK(s.z.norm() < 1e-12);
}

TEST_CASE("principal roots lose the sign at 2π") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 2 * pi);
  GaussianState s0 = GaussianState::ground(1);
  PropagateOptions po;
  po.principal_branch = true;
  GaussianState s = propagate(p, s0, po).back();
  CHECK(std::abs(s.a - s0.a) < 1e-12);
}

TEST_CASE("oscillator phase is e^{−it/2} throughout a loop") {
  SymplecticPath p = flow(QuadraticHamiltonian::harmonic(1), 0.0, 4 * pi);
  GaussianState s0 = GaussianState::ground(1);
  auto states = propagate(p, s0);
  for (std::size_t k = 0; k < states.size(); ++k)
    CHECK(std::abs(states[k].a - s0.a * std::exp(-0.5 * I1 * p.times()[k])) < 1e-11);
}

TEST_CASE("free particle spreading") {
  SymplecticPath p = flow(QuadraticHamiltonian::free_particle(1), 0.0, 1.0);
  GaussianState s = propagate(p, GaussianState::ground(1)).back();
  CHECK(std::abs(s.gamma(0, 0) - cplx(0.5, 0.5)) < 1e-13);
  // |φ|² ∝ exp(−Im Γ x²): variance 1/(2 Im Γ) = (1 + t²)/2
  double var = 0.5 / s.gamma(0, 0).imag();
  CHECK(var == doctest::Approx(1.0));
  CHECK(s.norm() == doctest::Approx(1.0));
}

TEST_CASE("Riccati integration agrees with the Möbius image") {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 3; ++n) {
    Mat S = random_symmetric(2 * n, rng, 0.4);
    auto H = QuadraticHamiltonian::from_S(S);
    CMat g0 = I1 * CMat::Identity(n, n);
    SiegelPoint gr = riccati_integrate(H, g0, 0.0, 2.0);
    Mat J = standard_symplectic_form(n);
    SiegelPoint gm = moebius(expm(Mat(2.0 * J * S)), g0).gamma;
    CHECK((gr - gm).norm() < 1e-9);
  }
}

TEST_CASE("Riccati free particle") {
  auto H = QuadraticHamiltonian::free_particle(1);
  cplx g = riccati_integrate(H, I1 * CMat::Identity(1, 1), 0.0, 1.0)(0, 0);
  CHECK(std::abs(g - (1.0 + I1) / 2.0) < 1e-12);
}

TEST_CASE("Wigner function of the ground state") {
  GaussianState g = GaussianState::ground(1);
  Mat pts = Mat::Zero(2, 1);
  CHECK(wigner(g, pts)(0) == doctest::Approx(2.0));
  // ∫W dq dp = 2π for unit norm
  const int N = 201;
  const double L = 14, h = L / (N - 1);
  Mat grid(2, N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) grid.col(i * N + j) << -L / 2 + i * h, -L / 2 + j * h;
  CHECK(wigner(g, grid).sum() * h * h == doctest::Approx(2 * pi).epsilon(1e-10));
}

TEST_CASE("Wigner closed form matches its defining integral") {
  CMat G = CMat::Constant(1, 1, cplx(0.4, 0.7));
  GaussianState s = GaussianState::squeezed(vec2(0.3, -0.6), G);
  const double q = 0.5, p = 0.2;
  const int N = 6001;
  const double L = 30, h = L / (N - 1);
  Mat xp(1, N), xm(1, N);
  for (int j = 0; j < N; ++j) {
    double u = -L / 2 + j * h;
    xp(0, j) = q + u / 2;
    xm(0, j) = q - u / 2;
  }
  CVec fp = wavefunction(s, xp), fm = wavefunction(s, xm);
  cplx acc = 0;
  for (int j = 0; j < N; ++j) acc += std::exp(-I1 * (-L / 2 + j * h) * p) * fp(j) * std::conj(fm(j));
  Mat pt(2, 1);
  pt << q, p;
  CHECK(std::abs(acc * h - wigner(s, pt)(0)) < 1e-10);
}

TEST_CASE("propagation requires a path from the identity") {
  SymplecticPath p = SymplecticPath::constant(rotation(0.3));
  CHECK_THROWS_AS(propagate(p, GaussianState::ground(1)), std::invalid_argument);
}
