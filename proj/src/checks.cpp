#include "qhdyn/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "qhdyn/coherent.hpp"
#include "qhdyn/metaplectic.hpp"
#include "qhdyn/siegel.hpp"
#include "qhdyn/weylq.hpp"

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

struct Outcome {
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::mt19937_64 rng_for(const CheckOptions& opt, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Criterion 1: closed-form HO propagation of φ₀ against the grid oracle on
// [0, 4π], and the sign flip at t = 2π.
Outcome ho_exactness(const CheckOptions& opt) {
  const QuadraticHamiltonian H = QuadraticHamiltonian::harmonic(1);
  const Grid g{1, 256, 20.0};
  const int samples = 32;
  const double dt = 4 * pi / samples;
  CMat U = propagator_matrix(H, g, 0.0, dt, 1);
  const GaussianState s0 = GaussianState::ground(1);
  GridWavefunction psi = sample(s0, g);
  const CVec phi0 = psi.psi;
  PropagateOptions po;
  po.principal_branch = opt.principal_branch;
  double worst = 0, at2pi_closed = 0, at2pi_grid = 0;
  for (int k = 1; k <= samples; ++k) {
    psi.psi = U * psi.psi;
    const double t = k * dt;
    GaussianState st = propagate(flow(H, 0.0, t), s0, po).back();
    CVec closed = sample(st, g).psi;
    worst = std::max(worst, relative_inner_error(closed, psi.psi, g));
    if (k == samples / 2) {
      at2pi_closed = (closed + phi0).cwiseAbs().maxCoeff();
      at2pi_grid = relative_inner_error(psi.psi, CVec(-phi0), g);
    }
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-5;
  o.pass = worst <= 1e-5 && at2pi_closed <= 1e-6 && at2pi_grid <= 1e-6;
  o.detail = "max L2 error " + fmt("%.2e", worst) + " over 32 times; |ψ(2π)+φ₀|∞ closed " +
             fmt("%.2e", at2pi_closed) + ", grid " + fmt("%.2e", at2pi_grid) + " (tol 1e-6)";
  return o;
}

// Criterion 2: coherent-state circle for z = (1, 0) and the extra phase.
Outcome coherent_circle(const CheckOptions& opt) {
  const QuadraticHamiltonian H = QuadraticHamiltonian::harmonic(1);
  const Grid g{1, 256, 20.0};
  const Vec z = vec2(1.0, 0.0);
  const GaussianState s0 = GaussianState::coherent(z);
  const int samples = 16;
  const double dt = 2 * pi / samples;
  CMat U = propagator_matrix(H, g, 0.0, dt, 1);
  CVec psi = sample(s0, g).psi;
  const Vec x = g.axis();
  PropagateOptions po;
  po.principal_branch = opt.principal_branch;
  double center_err = 0, phase_closed = 0, phase_grid = 0;
  for (int k = 1; k <= samples; ++k) {
    const double t = k * dt;
    psi = U * psi;
    SymplecticPath path = flow(H, 0.0, t);
    GaussianState st = propagate(path, s0, po).back();
    Vec expected = vec2(std::cos(t), -std::sin(t));
    Vec classical = classical_trajectory(path, z).back();
    center_err = std::max({center_err, (st.z - expected).norm(), (classical - expected).norm()});
    const double qt = expected(0), pt = expected(1);
    const double delta = 0.5 * (pt * qt - z(1) * z(0));
    const cplx want = std::exp(-0.5 * I1 * t) * std::exp(I1 * delta);
    phase_closed = std::max(phase_closed, std::abs(st.plain_amplitude() / s0.plain_amplitude() - want));
    // ⟨χ_t|ψ_t⟩ with χ_t = e^{ip_t(x−q_t)}φ₀(x−q_t), unit norm
    cplx ov = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      cplx chi = std::pow(pi, -0.25) * std::exp(I1 * pt * (x(j) - qt)) *
                 std::exp(-0.5 * (x(j) - qt) * (x(j) - qt));
      ov += std::conj(chi) * psi(j);
    }
    ov *= g.dx();
    phase_grid = std::max(phase_grid, std::abs(ov - want));
  }
  Outcome o;
  o.value = std::max(phase_closed, phase_grid);
  o.tolerance = 1e-7;
  o.pass = center_err <= 1e-8 && phase_closed <= 1e-7 && phase_grid <= 1e-7;
  o.detail = "centre error " + fmt("%.2e", center_err) + " (tol 1e-8); phase error closed " +
             fmt("%.2e", phase_closed) + ", grid " + fmt("%.2e", phase_grid);
  return o;
}

// Criterion 3: Riccati integration against the Möbius action.
Outcome riccati_moebius(const CheckOptions& opt) {
  auto rng = rng_for(opt, 3);
  const int cases = opt.full ? 20 : 6;
  double worst = 0, min_eig = 1e300;
  std::vector<double> times;
  for (int k = 1; k <= 16; ++k) times.push_back(2 * pi * k / 16);
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + c % 3;
    Mat S = random_symmetric(2 * n, rng, 0.4);
    QuadraticHamiltonian H = QuadraticHamiltonian::from_S(S);
    Mat Y = random_symmetric(n, rng, 0.5);
    Y = Y * Y.transpose() + 0.5 * Mat::Identity(n, n);
    CMat g0 = random_symmetric(n, rng, 0.5).cast<cplx>() + I1 * Y.cast<cplx>();
    std::vector<SiegelPoint> gr = riccati_integrate(H, g0, 0.0, times);
    Mat J = standard_symplectic_form(n);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Mat F = expm(Mat(times[k] * J * S));
      SiegelPoint gm = moebius(F, g0).gamma;
      worst = std::max(worst, (gr[k] - gm).norm() / std::max(1.0, gm.norm()));
      min_eig = std::min(min_eig, verify_siegel(gr[k]).min_imag_eigenvalue);
    }
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-7;
  o.pass = worst <= 1e-7 && min_eig > 0;
  o.detail = std::to_string(cases) + " Hamiltonians; max relative error " + fmt("%.2e", worst) +
             "; min eig Im Γ " + fmt("%.3e", min_eig);
  return o;
}

// Criterion 4: index values on the loop, the quarter turn and the det < 0 path.
Outcome index_values(const CheckOptions&) {
  IndexResult loop = cz_index(rotation_path(1, 2 * pi));
  IndexResult quarter = cz_index(rotation_path(1, pi / 2));
  IndexResult half = cz_index(det_negative_path());
  const double limit_err = std::abs(half.limit - pi);
  Outcome o;
  o.value = limit_err;
  o.tolerance = 1e-2;
  const bool half_ok = half.half_integer && std::abs(half.nu - std::round(half.nu)) == 0.5;
  o.pass = loop.nu == 1.0 && quarter.nu == 0.0 && half_ok && limit_err <= 1e-2;
  o.detail = "loop ν=" + fmt("%g", loop.nu) + ", quarter ν=" + fmt("%g", quarter.nu) +
             ", det<0 path ν=" + fmt("%g", half.nu) + " limit " + fmt("%.6f", half.limit) +
             " (|limit−π| " + fmt("%.2e", limit_err) + ")";
  return o;
}

CVec inner_probe(const CMat& A, const CVec& v) { return A * v; }

// Criterion 5: Weyl quantization of the contravariant symbol against the
// HO propagator; also fits the overall normalization constant.
Outcome symbol_operator(const CheckOptions& opt) {
  const QuadraticHamiltonian H = QuadraticHamiltonian::harmonic(1);
  const Grid g{1, opt.full ? 512 : 256, 20.0};
  const std::vector<Vec> probes{vec2(0, 0), vec2(1, 0.5), vec2(-2, 1)};
  double worst = 0, worst_const = 0;
  std::string nus;
  for (double t : {0.3, 1.0, 2.0}) {
    SymplecticPath path = rotation_path(1, t);
    IndexResult idx = cz_index(path);
    GaussianSymbol R = mw_contravariant(path.back(), idx.nu);
    GridOperator K = quantize_gaussian(R.c, R.M, g, 1.0);
    GridOperator K1 = quantize_gaussian(R.c / std::pow(2.0, 1), R.M, g, 1.0);
    CMat U = propagator_matrix(H, g, 0.0, t, 1);
    nus += (nus.empty() ? "" : ",") + fmt("%g", idx.nu);
    for (const Vec& z : probes) {
      CVec psi = sample(GaussianState::coherent(z), g).psi;
      CVec a = U * psi, b = inner_probe(K.K, psi), b1 = inner_probe(K1.K, psi);
      worst = std::max(worst, relative_inner_error(b, a, g));
      // least-squares constant c with U ≈ c · Op(R/2ⁿ)
      cplx c = b1.dot(a) / b1.dot(b1);
      worst_const = std::max(worst_const, std::abs(c - 2.0));
    }
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-4;
  o.pass = worst <= 1e-4 && worst_const <= 1e-4;
  o.detail = "N=" + std::to_string(g.N) + " max relative error " + fmt("%.2e", worst) +
             "; ν=" + nus + "; fitted normalization 2ⁿ with deviation " + fmt("%.2e", worst_const);
  return o;
}

// Criterion 6: coherent-state matrix elements against grid propagation.
Outcome matrix_elements(const CheckOptions& opt) {
  auto rng = rng_for(opt, 6);
  const int cases = opt.full ? 50 : 8;
  const Grid g{1, opt.full ? 384 : 256, 32.0};
  double worst = 0, worst_mass = 0;
  int done = 0, draws = 0;
  while (done < cases) {
    if (++draws > 20 * cases) throw NumericalError("matrix_elements: too many rejected draws");
    Mat S = random_symmetric(2, rng, 0.6);
    QuadraticHamiltonian H = QuadraticHamiltonian::from_S(S);
    SymplecticPath path = flow(H, 0.0, 1.0);
    if (inf_norm(path.back()) > 2.5) continue;
    Vec z = vec2(uniform(rng, -1, 1), uniform(rng, -1, 1));
    Vec X = vec2(uniform(rng, -1, 1), uniform(rng, -1, 1));
    GridWavefunction psi = sample(GaussianState::coherent(z), g);
    GridPropagation gp = grid_propagate(H, psi, 0.0, 1.0, 1);
    worst_mass = std::max(worst_mass, gp.boundary_mass);
    cplx grid = sample(GaussianState::coherent(Vec(z + X)), g).inner(gp.psi);
    cplx closed = matrix_element(metaplectic_branch(path), z, X);
    worst = std::max(worst, std::abs(closed - grid));
    ++done;
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-5;
  o.pass = worst <= 1e-5 && worst_mass <= 1e-8;
  o.detail = std::to_string(cases) + " triples on N=" + std::to_string(g.N) + "; max |Δ| " +
             fmt("%.2e", worst) + "; max boundary mass " + fmt("%.1e", worst_mass);
  return o;
}

// Criterion 7: windowed symplectic Fourier transform of the contravariant
// symbol against the covariant symbol.
Outcome duality(const CheckOptions& opt) {
  auto rng = rng_for(opt, 7);
  const int cases = opt.full ? 10 : 3;
  const Vec out_q = (Vec(3) << -0.6, 0.0, 0.7).finished();
  const Vec out_p = (Vec(3) << -0.7, 0.0, 0.6).finished();
  const double Xmax = 1.0;
  const Mat J = standard_symplectic_form(1), I2 = Mat::Identity(2, 2);
  double worst = 0;
  int done = 0, draws = 0, largest = 0;
  while (done < cases) {
    if (++draws > 100 * cases) throw NumericalError("duality: too many rejected draws");
    Mat S = random_symmetric(2, rng, 0.8);
    Mat F = expm(Mat(J * S));
    if (std::abs(Mat(I2 + F).determinant()) < 0.1 || std::abs(Mat(I2 - F).determinant()) < 0.1)
      continue;
    Mat M = symmetrize(Mat(-J * (I2 - F) * (I2 + F).inverse()));
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    const double mmin = es.eigenvalues().cwiseAbs().minCoeff();
    const double mmax = es.eigenvalues().cwiseAbs().maxCoeff();
    // Window radius R0 and width σ keep the window's own transform below
    // roundoff at the probe points.
    const double rstar = Xmax / (2 * mmin);
    double sigma = 1.0;
    for (int it = 0; it < 50; ++it) {
      double R0 = rstar + 1.0 + 4.2 * sigma;
      sigma = std::max(0.5, 8.5 / (2 * mmin * (R0 - 3 * sigma)));
    }
    const double R0 = rstar + 1.0 + 4.2 * sigma, Rb = R0 + 4.5 * sigma;
    const double h = std::min(pi / (2 * mmax * Rb + Xmax + 2) / 1.3, 0.1);
    const int Ng = static_cast<int>(2 * Rb / h) + 1;
    if (Ng > 2500) continue;
    largest = std::max(largest, Ng);
    SymplecticPath path =
        SymplecticPath::from_function([J, S](double t) { return expm(Mat(t * J * S)); }, 0, 1, 33);
    IndexResult idx = cz_index(path);
    GaussianSymbol R = mw_contravariant(F, idx.nu);
    GaussianSymbol C = covariant_symbol(metaplectic_branch(path));
    Vec y(Ng);
    for (int j = 0; j < Ng; ++j) y(j) = (j - (Ng - 1) / 2.0) * h;
    PhaseSamples A{y, y, CMat(Ng, Ng), 1.0};
    const double mqq = R.M(0, 0).real(), mqp = R.M(0, 1).real(), mpp = R.M(1, 1).real();
    for (int i = 0; i < Ng; ++i)
      for (int j = 0; j < Ng; ++j) {
        double r = std::hypot(y(i), y(j));
        double w = 0.5 * std::erfc((r - R0) / sigma);
        A.values(i, j) =
            w * std::exp(I1 * (mqq * y(i) * y(i) + 2 * mqp * y(i) * y(j) + mpp * y(j) * y(j)));
      }
    CMat T = covariant_from_contravariant(A, out_q, out_p) * R.c;
    for (Eigen::Index a = 0; a < out_q.size(); ++a)
      for (Eigen::Index b = 0; b < out_p.size(); ++b) {
        cplx ref = C(vec2(out_q(a), out_p(b)));
        worst = std::max(worst, std::abs(T(a, b) - ref) / std::abs(ref));
      }
    ++done;
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-6;
  o.pass = worst <= 1e-6;
  o.detail = std::to_string(cases) + " matrices, 9 probe points each; max relative error " +
             fmt("%.2e", worst) + "; largest transform grid " + std::to_string(largest) + "²";
  return o;
}

// Criterion 8: weak limit of regularized covariant symbols of the shear.
Outcome degenerate_limit(const CheckOptions&) {
  Mat F(2, 2);
  F << 1, 1, 0, 1;
  SymplecticPath path = SymplecticPath::from_function(
      [](double t) { return (Mat(2, 2) << 1, t, 0, 1).finished(); }, 0, 1, 33);
  MetaplecticBranch b = metaplectic_branch(path);
  DegenerateReport rep;
  GaussianSymbol D = degenerate_covariant(b, &rep);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3};
  double worst_extrap = 0, worst_oracle = 0;
  bool monotone = true;
  std::ostringstream raw;
  for (double s : {0.5, 1.0, 2.0}) {
    Mat W = Mat::Identity(2, 2) / (s * s);
    Vec z0 = Vec::Zero(2);
    cplx target = pair_with_gaussian(D, W, z0);
    // √(2π)e^{−iπ/4}δ(ξ)e^{ix²/2} paired by hand
    cplx hand = std::sqrt(2 * pi) * std::exp(-I1 * pi / 4.0) *
                std::sqrt(cplx(2 * pi) / (1.0 / (s * s) - I1));
    worst_oracle = std::max(worst_oracle, std::abs(target - hand) / std::abs(hand));
    std::vector<cplx> P;
    std::vector<double> err;
    for (double e : eps) {
      Mat Fe = regularize_eigenvalue_one(F, e);
      P.push_back(pair_with_gaussian(covariant_symbol(continue_branch(b, Fe)), W, z0));
      err.push_back(std::abs(P.back() - target) / std::abs(target));
    }
    monotone = monotone && err[2] < err[1] && err[1] < err[0];
    cplx extrap = (10.0 * P[2] - P[1]) / 9.0;
    worst_extrap = std::max(worst_extrap, std::abs(extrap - target) / std::abs(target));
    raw << (raw.tellp() ? "; " : "") << "s=" << s << ": " << fmt("%.1e", err[0]) << ","
        << fmt("%.1e", err[1]) << "," << fmt("%.1e", err[2]);
  }
  Outcome o;
  o.value = worst_extrap;
  o.tolerance = 1e-3;
  o.pass = worst_extrap <= 1e-3 && monotone && worst_oracle <= 1e-6;
  o.detail = "extrapolated relative error " + fmt("%.2e", worst_extrap) +
             "; raw errors per ε " + raw.str() + "; Dirac pairing vs closed form " +
             fmt("%.1e", worst_oracle) + "; dirac_dim " + std::to_string(rep.dirac_dim);
  return o;
}

// Criterion 9: decay bound of γ_F.
Outcome gamma_bound_check(const CheckOptions& opt) {
  auto rng = rng_for(opt, 9);
  const int cases = opt.full ? 1000 : 200;
  std::normal_distribution<double> N01(0.0, 1.0);
  double worst = -1e300, equality = 0;
  const double scales[] = {0.3, 0.8, 1.5};
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + c % 3;
    Mat F = random_symplectic(n, rng, scales[c % 3]);
    Vec X(2 * n);
    for (Eigen::Index k = 0; k < X.size(); ++k) X(k) = N01(rng);
    worst = std::max(worst, gamma_form(F, X).real() - gamma_bound(F, X));
    Mat I = Mat::Identity(2 * n, 2 * n);
    equality = std::max(equality, std::abs(gamma_form(I, X) - gamma_bound(I, X)));
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-12;
  o.pass = worst <= 1e-12 && equality <= 1e-12;
  o.detail = std::to_string(cases) + " draws; max Re γ − bound " + fmt("%.2e", worst) +
             "; |γ_I − bound| " + fmt("%.1e", equality);
  return o;
}

// Criterion 10: exact Egorov property on grid states.
Outcome egorov(const CheckOptions& opt) {
  auto rng = rng_for(opt, 10);
  const int cases = opt.full ? 5 : 2;
  const Grid g{1, 256, 24.0};
  const double t = 1.0;
  std::vector<Mat> Qs(3, Mat::Zero(2, 2));
  Qs[0](0, 0) = 2;                 // q²
  Qs[1](1, 1) = 2;                 // p²
  Qs[2](0, 1) = Qs[2](1, 0) = 1;   // qp
  double worst = 0, worst_mass = 0;
  int done = 0, draws = 0;
  while (done < cases) {
    if (++draws > 50 * cases) throw NumericalError("egorov: too many rejected draws");
    Mat S = random_symmetric(2, rng, 0.5);
    QuadraticHamiltonian H = QuadraticHamiltonian::from_S(S);
    Mat F = flow(H, 0.0, t).back();
    if (inf_norm(F) > 2.5) continue;
    GaussianState s0 = GaussianState::coherent(vec2(0.5, -0.3));
    GridWavefunction psi0 = sample(s0, g);
    GridPropagation gp = grid_propagate(H, psi0, 0.0, t, 1);
    worst_mass = std::max(worst_mass, gp.boundary_mass);
    for (const Mat& Q : Qs) {
      PolynomialSymbol A = quadratic_symbol(Q, Vec::Zero(2), 0.0);
      cplx lhs = gp.psi.inner(quantize_quadratic(A, g, 1.0).apply(gp.psi));
      cplx rhs = psi0.inner(quantize_quadratic(composed_symbol(A, F), g, 1.0).apply(psi0));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    ++done;
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-6;
  o.pass = worst <= 1e-6 && worst_mass <= 1e-8;
  o.detail = std::to_string(cases) + " Hamiltonians × {q², p², qp}; max |Δ| " + fmt("%.2e", worst) +
             "; max boundary mass " + fmt("%.1e", worst_mass);
  return o;
}

// Criterion 11: composition modulus and sign.
Outcome composition(const CheckOptions& opt) {
  auto rng = rng_for(opt, 11);
  const int cases = opt.full ? 20 : 6;
  double worst = 0;
  int plus = 0, minus = 0;
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + c % 2;
    Mat F1 = random_symplectic(n, rng, 0.6), F2 = random_symplectic(n, rng, 0.6);
    SymplecticPath p1 = polar_symplectic_path(F1), p2 = polar_symplectic_path(F2);
    SymplecticPath p12 = polar_symplectic_path(Mat(F1 * F2));
    Vec zero = Vec::Zero(2 * n);
    double lhs = std::abs(product_matrix_element(p1, p2, zero, zero));
    double rhs = std::abs(matrix_element(metaplectic_branch(p12), zero, zero));
    worst = std::max(worst, std::abs(lhs - rhs));
    (compose_sign(p1, p2, p12) > 0 ? plus : minus)++;
  }
  Outcome o;
  o.value = worst;
  o.tolerance = 1e-8;
  o.pass = worst <= 1e-8;
  o.detail = std::to_string(cases) + " pairs; max modulus difference " + fmt("%.2e", worst) +
             "; signs +1×" + std::to_string(plus) + ", −1×" + std::to_string(minus);
  return o;
}

using CheckFn = Outcome (*)(const CheckOptions&);

struct Entry {
  CheckInfo info;
  CheckFn fn;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e{
      {{1, "ho-exactness", "HO closed form vs grid on [0,4π], −φ₀ at 2π", 30}, ho_exactness},
      {{2, "coherent-circle", "coherent-state centre and extra phase", 5}, coherent_circle},
      {{3, "riccati-moebius", "Riccati integration vs Möbius action", 60}, riccati_moebius},
      {{4, "index-values", "winding index: loop, quarter turn, det<0 path", 60}, index_values},
      {{5, "symbol-operator", "quantized contravariant symbol vs HO propagator", 120},
       symbol_operator},
      {{6, "matrix-elements", "coherent matrix elements vs grid propagation", 180},
       matrix_elements},
      {{7, "covariant-duality", "symplectic Fourier transform duality", 60}, duality},
      {{8, "degenerate-limit", "shear weak limit of regularized symbols", 120}, degenerate_limit},
      {{9, "gamma-bound", "decay bound of γ_F", 30}, gamma_bound_check},
      {{10, "exact-egorov", "exact Egorov property on grid states", 120}, egorov},
      {{11, "composition", "metaplectic composition modulus and sign", 60}, composition},
  };
  return e;
}

}  // namespace

const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> r = [] {
    std::vector<CheckInfo> out;
    for (const Entry& e : entries()) out.push_back(e.info);
    return out;
  }();
  return r;
}

std::vector<CheckResult> run_checks(const CheckOptions& opt,
                                    const std::function<void(const CheckResult&)>& progress) {
  std::vector<CheckResult> out;
  for (const Entry& e : entries()) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), e.info.id) == opt.only.end())
      continue;
    CheckResult r;
    r.id = e.info.id;
    r.name = e.info.name;
    r.budget = e.info.budget;
    auto start = std::chrono::steady_clock::now();
    try {
      Outcome o = e.fn(opt);
      r.pass = o.pass;
      r.value = o.value;
      r.tolerance = o.tolerance;
      r.detail = o.detail;
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("error: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opt.full && r.seconds > r.budget) {
      r.pass = false;
      r.detail += "; runtime " + fmt("%.1f", r.seconds) + " s exceeds budget";
    }
    if (progress) progress(r);
    out.push_back(r);
  }
  return out;
}

json to_json(const CheckResult& r) {
  return json{{"id", r.id},          {"name", r.name},   {"pass", r.pass},
              {"value", r.value},    {"tolerance", r.tolerance},
              {"detail", r.detail}};
}

}  // namespace qhdyn
