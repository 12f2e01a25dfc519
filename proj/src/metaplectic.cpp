#include "qhdyn/metaplectic.hpp"

#include <cmath>

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

CMat complexify(const Mat& A) { return A.cast<cplx>(); }

void require_identity_start(const SymplecticPath& path, const char* who) {
  const Mat& F0 = path.front();
  if (inf_norm(Mat(F0 - Mat::Identity(F0.rows(), F0.cols()))) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": path must start at the identity");
}

cplx branch_inv_sqrt(cplx w, double arg) {
  return std::pow(std::abs(w), -0.5) * std::exp(-0.5 * I1 * arg);
}

// (1 + 𝓜₀ − F(1 − 𝓜₀))(1 + 𝓜₀ + F(1 − 𝓜₀))⁻¹
CMat cayley_evolved(const Mat& F, const CMat& calM0) {
  const Eigen::Index d = F.rows();
  CMat I = CMat::Identity(d, d);
  CMat a = I + calM0, b = complexify(F) * (I - calM0);
  return (a - b) * (a + b).inverse();
}

// Argument tracks of f(F_t, s) at each stop s ∈ [0, 1], continued from a
// mesh resolved at s = 0. f must not vanish on path × [0, 1]; each segment
// increment is then continuous in s and is followed on the branch nearest
// its previous value. Every step is checked against two half steps, which
// disagree by 2π when a step aliases.
std::vector<ArgumentTrack> continued_tracks(const SymplecticPath& path,
                                            const std::function<cplx(const Mat&, double)>& f,
                                            const std::vector<double>& stops, double max_step,
                                            int max_depth, double ds_max) {
  const ArgumentTrack base = track_argument(
      path, [&f](const Mat& F) { return f(F, 0.0); }, max_step, max_depth);
  const std::size_t m = base.t.size();
  struct State {
    std::vector<cplx> v;
    std::vector<double> w;  // segment increments
    double a0;
    double s;
  };
  State cur{base.value, std::vector<double>(m - 1), base.arg.front(), 0.0};
  for (std::size_t j = 0; j + 1 < m; ++j) cur.w[j] = base.arg[j + 1] - base.arg[j];
  // one continuation step; returns the largest increment change
  auto advance = [&](const State& st, double s2, State& out) {
    out.s = s2;
    out.v.resize(m);
    out.w.resize(m - 1);
    for (std::size_t j = 0; j < m; ++j) out.v[j] = f(base.F[j], s2);
    double da0 = std::arg(out.v[0] / st.v[0]), worst = std::abs(da0);
    out.a0 = st.a0 + da0;
    for (std::size_t j = 0; j + 1 < m; ++j) {
      double d = std::arg(out.v[j + 1] / out.v[j]);
      out.w[j] = d + 2 * pi * std::round((st.w[j] - d) / (2 * pi));
      worst = std::max(worst, std::abs(out.w[j] - st.w[j]));
    }
    return worst;
  };
  double ds = ds_max;
  State full, half, twice;
  std::vector<ArgumentTrack> out;
  for (double stop : stops) {
    require(stop >= cur.s && stop <= 1.0, "continued_tracks: stops must increase within [0, 1]");
    while (cur.s < stop) {
      const double s2 = std::min(stop, cur.s + ds);
      double worst = advance(cur, s2, full);
      worst = std::max(worst, advance(cur, 0.5 * (cur.s + s2), half));
      worst = std::max(worst, advance(half, s2, twice));
      double split = std::abs(full.a0 - twice.a0);
      for (std::size_t j = 0; j + 1 < m; ++j) split = std::max(split, std::abs(full.w[j] - twice.w[j]));
      if (worst > pi / 4 || split > 1e-6) {
        ds /= 2;
        if (ds < 1e-9) throw NumericalError("continued_tracks: continuation step underflow");
        continue;
      }
      std::swap(cur, twice);
      if (worst < pi / 16) ds = std::min(2 * ds, ds_max);
    }
    ArgumentTrack tr;
    tr.t = base.t;
    tr.F = base.F;
    tr.value = cur.v;
    tr.node_index = base.node_index;
    tr.arg.resize(m);
    tr.arg[0] = cur.a0;
    for (std::size_t j = 0; j + 1 < m; ++j) tr.arg[j + 1] = tr.arg[j] + cur.w[j];
    for (std::size_t k : tr.node_index) tr.node_arg.push_back(tr.arg[k]);
    out.push_back(std::move(tr));
  }
  return out;
}

// At most ~0.3/n of an e-fold in ε per continuation step.
double log_family_step(int n, double eps0, double eps1) {
  return std::min(1.0 / 16, 0.3 / (n * std::log(eps0 / eps1)));
}

// δ(F, iεJ) on the geometric family ε(s) = ε₀^{1−s}ε₁^s.
std::function<cplx(const Mat&, double)> regularizer_family(int n, double eps0, double eps1) {
  return [n, eps0, eps1](const Mat& F, double s) {
    double eps = std::exp((1 - s) * std::log(eps0) + s * std::log(eps1));
    return delta_det(F, HamiltonianComplexMatrix::regularizer(n, eps).calM);
  };
}

}  // namespace

cplx GaussianSymbol::operator()(const Vec& X) const {
  require(!dirac, "pointwise value of a Dirac-decorated symbol is undefined");
  require(X.size() == M.rows(), "symbol evaluation: dimension mismatch");
  CVec x = X.cast<cplx>();
  return c * std::exp(I1 * (x.transpose() * M * x)(0));
}

cplx pair_with_gaussian(const GaussianSymbol& R, const Mat& W, const Vec& z0) {
  require(W.rows() == W.cols() && W.rows() == z0.size(), "pairing: dimension mismatch");
  Mat Wr = W;
  Vec b = W * z0;
  double k = static_cast<double>(W.rows());
  if (R.dirac) {
    const Mat& U = R.dirac->support;
    Wr = U.transpose() * W * U;
    b = U.transpose() * W * z0;
    k = static_cast<double>(U.cols());
  }
  const double base = -0.5 * z0.dot(W * z0);
  if (k == 0) return R.c * std::exp(base);
  CMat P = complexify(Wr) - 2.0 * I1 * R.M;
  CVec bc = b.cast<cplx>();
  cplx e = 0.5 * (bc.transpose() * P.partialPivLu().solve(bc))(0);
  return R.c * std::pow(2 * pi, k / 2) * det_pow_minus_half_re_pos(P) * std::exp(base + e);
}

HamiltonianComplexMatrix HamiltonianComplexMatrix::from_M(const CMat& M) {
  require(M.rows() == M.cols() && M.rows() % 2 == 0, "M must be 2n×2n");
  Mat J = standard_symplectic_form(static_cast<int>(M.rows() / 2));
  HamiltonianComplexMatrix h{complexify(J) * symmetrize(M)};
  h.validate();
  return h;
}

HamiltonianComplexMatrix HamiltonianComplexMatrix::regularizer(int n, double eps) {
  require(eps > 0, "regularizer needs ε > 0");
  return {I1 * eps * complexify(standard_symplectic_form(n))};
}

CMat HamiltonianComplexMatrix::M() const {
  Mat J = standard_symplectic_form(static_cast<int>(calM.rows() / 2));
  return -complexify(J) * calM;
}

void HamiltonianComplexMatrix::validate(double tol) const {
  Mat J = standard_symplectic_form(static_cast<int>(calM.rows() / 2));
  CMat Jc = complexify(J);
  double scale = std::max(1.0, inf_norm(calM));
  require(inf_norm(CMat(calM.transpose() * Jc + Jc * calM)) <= tol * scale,
          "𝓜 is not Hamiltonian");
  require(min_eigenvalue(Mat(M().imag())) > 0, "Im M must be positive definite");
}

cplx delta_det(const Mat& F, const CMat& calM0) {
  const Eigen::Index d = F.rows();
  CMat I = CMat::Identity(d, d);
  return CMat((I + calM0 + complexify(F) * (I - calM0)) / 2.0).determinant();
}

std::vector<SymbolNode> symbol_evolution(const QuadraticHamiltonian& H,
                                         const HamiltonianComplexMatrix& M0, double t0,
                                         double t1, const FlowOptions& opt) {
  require(H.hbar() == 1.0, "symbol_evolution: ħ = 1 only");
  M0.validate();
  SymplecticPath path = flow(H, t0, t1, opt);
  const CMat calM0 = M0.calM;
  Mat J = standard_symplectic_form(H.n());
  // homotopy from M = iI to M₀ inside the Siegel cone
  const CMat Jc = complexify(J), Mend = M0.M();
  const CMat Mstart = I1 * CMat::Identity(2 * H.n(), 2 * H.n());
  auto family = [&](const Mat& F, double s) {
    return delta_det(F, CMat(Jc * ((1 - s) * Mstart + s * Mend)));
  };
  ArgumentTrack tr =
      continued_tracks(path, family, {1.0}, opt.max_arg_step, opt.max_depth, 1.0 / (16 * H.n()))
          .front();
  std::vector<SymbolNode> out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Mat& F = path.matrices()[k];
    cplx dl = delta_det(F, calM0);
    CMat calM = cayley_evolved(F, calM0);
    GaussianSymbol s{branch_inv_sqrt(dl, tr.node_arg[k]), symmetrize(CMat(-complexify(J) * calM)),
                     tr.node_arg[k] / (2 * pi), std::nullopt};
    out.push_back({path.times()[k], s});
  }
  return out;
}

SymbolNode symbol_evolution_ode(const QuadraticHamiltonian& H, const HamiltonianComplexMatrix& M0,
                                double t0, double t1, int steps) {
  require(steps >= 1, "symbol_evolution_ode: steps ≥ 1");
  M0.validate();
  const int n = H.n();
  const CMat J = complexify(standard_symplectic_form(n));
  const CMat I = CMat::Identity(2 * n, 2 * n);
  struct State {
    CMat calM;
    cplx alpha;
  };
  auto rhs = [&](double t, const State& s) {
    CMat calS = J * complexify(H.S(t));
    return State{0.5 * (s.calM + I) * calS * (s.calM - I), 0.25 * (s.calM * calS).trace() * s.alpha};
  };
  auto axpy = [](const State& a, double h, const State& k) {
    return State{a.calM + h * k.calM, a.alpha + h * k.alpha};
  };
  State s{M0.calM, 1.0};
  const double h = (t1 - t0) / steps;
  for (int k = 0; k < steps; ++k) {
    double t = t0 + k * h;
    State k1 = rhs(t, s);
    State k2 = rhs(t + h / 2, axpy(s, h / 2, k1));
    State k3 = rhs(t + h / 2, axpy(s, h / 2, k2));
    State k4 = rhs(t + h, axpy(s, h, k3));
    s.calM += h / 6 * (k1.calM + 2.0 * k2.calM + 2.0 * k3.calM + k4.calM);
    s.alpha += h / 6 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
  }
  GaussianSymbol g{s.alpha, symmetrize(CMat(-J * s.calM)), 0.0, std::nullopt};
  return {t1, g};
}

IndexResult cz_index(const SymplecticPath& path, const IndexOptions& opt) {
  require_identity_start(path, "cz_index");
  require(opt.epsilons.size() >= 2, "cz_index: need at least two ε values");
  for (std::size_t k = 1; k < opt.epsilons.size(); ++k)
    require(opt.epsilons[k] < opt.epsilons[k - 1] && opt.epsilons[k] > 0,
            "cz_index: ε schedule must decrease and stay positive");
  const int n = path.n();
  const Mat& F1 = path.back();
  IndexResult r;
  r.epsilons = opt.epsilons;
  r.det_one_plus_F = Mat(Mat::Identity(2 * n, 2 * n) + F1).determinant();
  if (std::abs(r.det_one_plus_F) < 1e-10)
    throw NumericalError("cz_index: det(1+F) vanishes at the endpoint; ν is undefined");
  r.half_integer = r.det_one_plus_F < 0;
  // Each refinement appends ε/10 to the schedule; the mesh is fixed at the
  // well-conditioned end of the continuation, so only ε needs refining.
  std::vector<double> eps = opt.epsilons;
  const double eps0 = std::max(1.0, eps.front());
  bool converged = false;
  for (int refine = 0; refine <= opt.max_refinements && !converged; ++refine) {
    if (refine > 0) eps.push_back(eps.back() / 10);
    r.refinements = refine;
    r.epsilons = eps;
    r.raw.clear();
    r.extrapolated.clear();
    const double eps1 = eps.back();
    std::vector<double> stops;
    for (double e : eps) stops.push_back(std::log(eps0 / e) / std::log(eps0 / eps1));
    std::vector<ArgumentTrack> tracks =
        continued_tracks(path, regularizer_family(n, eps0, eps1), stops, opt.max_arg_step,
                         opt.max_depth, log_family_step(n, eps0, eps1));
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const ArgumentTrack& tr = tracks[k];
      r.raw.push_back(tr.arg.back() - tr.arg.front());
      if (k + 1 == eps.size()) {
        r.samples.clear();
        for (std::size_t j = 0; j < tr.t.size(); ++j)
          r.samples.push_back({tr.t[j], tr.value[j], tr.arg[j]});
      }
      if (k > 0) {
        // linear Richardson step in ε
        double q = eps[k - 1] / eps[k];
        r.extrapolated.push_back((q * r.raw[k] - r.raw[k - 1]) / (q - 1));
      }
    }
    converged = r.extrapolated.size() < 2 ||
                std::abs(r.extrapolated.back() - r.extrapolated[r.extrapolated.size() - 2]) <=
                    opt.agreement;
  }
  if (!converged)
    throw NumericalError("cz_index: extrapolation in ε did not converge down to ε = " +
                         std::to_string(eps.back()));
  r.limit = r.extrapolated.back();
  double x = r.limit / (2 * pi);
  r.nu = r.half_integer ? std::round(x - 0.5) + 0.5 : std::round(x);
  if (std::abs(x - r.nu) > 0.05)
    throw NumericalError("cz_index: winding " + std::to_string(x) +
                         " is not near the admissible lattice");
  return r;
}

GaussianSymbol mw_contravariant(const Mat& F, double nu) {
  const int n = static_cast<int>(F.rows() / 2);
  Mat I = Mat::Identity(2 * n, 2 * n);
  double d = Mat(I + F).determinant();
  if (std::abs(d) <= 1e-10)
    throw NumericalError("mw_contravariant: 1+F is near singular; use matrix elements");
  Mat J = standard_symplectic_form(n);
  Mat M = symmetrize(Mat(-J * (I - F) * (I + F).inverse()));
  cplx c = std::pow(2.0, n) * std::exp(-I1 * pi * nu) / std::sqrt(std::abs(d));
  return {c, complexify(M), nu, std::nullopt};
}

GaussianSymbol regularized_contravariant(const SymplecticPath& path, double eps) {
  require_identity_start(path, "regularized_contravariant");
  const int n = path.n();
  CMat calM0 = HamiltonianComplexMatrix::regularizer(n, eps).calM;
  const double eps0 = std::max(1.0, eps);
  ArgumentTrack tr =
      eps0 == eps ? track_argument(path, [&calM0](const Mat& F) { return delta_det(F, calM0); })
                  : continued_tracks(path, regularizer_family(n, eps0, eps), {1.0}, pi / 4, 40,
                                     log_family_step(n, eps0, eps))
                        .front();
  const Mat& F = path.back();
  CMat J = complexify(standard_symplectic_form(n));
  CMat M = symmetrize(CMat(-J * cayley_evolved(F, calM0)));
  return {branch_inv_sqrt(tr.value.back(), tr.arg.back()), M, tr.arg.back() / (2 * pi),
          std::nullopt};
}

cplx MetaplecticBranch::inv_sqrt_d() const { return branch_inv_sqrt(d, arg_d); }

namespace {

cplx d_of(const Mat& F) {
  const Eigen::Index d = F.rows();
  Mat I = Mat::Identity(d, d);
  Mat J = standard_symplectic_form(static_cast<int>(d / 2));
  return CMat(complexify(I + F) + I1 * complexify(J * (I - F))).determinant();
}

}  // namespace

MetaplecticBranch metaplectic_branch(const SymplecticPath& path) {
  require_identity_start(path, "metaplectic_branch");
  ArgumentTrack tr = track_argument(path, d_of);
  return {path.back(), tr.value.back(), tr.arg.back()};
}

MetaplecticBranch continue_branch(const MetaplecticBranch& b, const Mat& F2, int steps) {
  require(steps >= 1 && F2.rows() == b.F.rows(), "continue_branch: bad arguments");
  double arg = b.arg_d;
  cplx d = b.d;
  for (int k = 1; k <= steps; ++k) {
    double s = static_cast<double>(k) / steps;
    d = d_of(Mat((1 - s) * b.F + s * F2));
    if (std::abs(d) == 0) throw NumericalError("continue_branch: d vanishes on the segment");
    arg = continue_arg(arg, d);
  }
  return {F2, d, arg};
}

CMat K_F(const Mat& F) {
  const Eigen::Index d = F.rows();
  Mat I = Mat::Identity(d, d);
  Mat J = standard_symplectic_form(static_cast<int>(d / 2));
  CMat den = complexify(I + F) + I1 * complexify(J * (I - F));
  return complexify(I + F) * den.inverse();
}

cplx matrix_element(const MetaplecticBranch& b, const Vec& z, const Vec& X) {
  const int n = static_cast<int>(b.F.rows() / 2);
  require(z.size() == 2 * n && X.size() == 2 * n, "matrix_element: dimension mismatch");
  Mat J = standard_symplectic_form(n);
  CMat K = K_F(b.F);
  CVec w = z.cast<cplx>() + 0.5 * (X.cast<cplx>() - I1 * (J * X).cast<cplx>());
  Vec zx = z + 0.5 * X;
  cplx e = -zx.squaredNorm() + 0.5 * I1 * sigma(X, z) + (w.transpose() * K * w)(0);
  return std::pow(2.0, n) * b.inv_sqrt_d() * std::exp(e);
}

GaussianSymbol covariant_symbol(const MetaplecticBranch& b) {
  const Mat& F = b.F;
  const int n = static_cast<int>(F.rows() / 2);
  Mat I = Mat::Identity(2 * n, 2 * n);
  Mat J = standard_symplectic_form(n);
  double dm = Mat(I - F).determinant();
  if (std::abs(dm) <= 1e-10)
    throw NumericalError("covariant_symbol: 1−F is near singular; use degenerate_covariant");
  Mat C = (I + F) * (I - F).inverse();
  Mat Lam = C * J;
  require(inf_norm(Mat(Lam - Lam.transpose())) <= 1e-8 * std::max(1.0, inf_norm(Lam)),
          "covariant_symbol: (1+F)(1−F)⁻¹J is not symmetric; F not symplectic");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(Lam), Eigen::EigenvaluesOnly);
  cplx root = 1.0;  // det(1 + iΛ)^{1/2}, every factor in the right half-plane
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    root *= std::sqrt(cplx(1.0, es.eigenvalues()(k)));
  cplx c = b.inv_sqrt_d() * root;
  Mat M = symmetrize(Mat(-0.25 * J * C));
  return {c, complexify(M), std::arg(c) / pi, std::nullopt};
}

cplx gamma_form(const Mat& F, const Vec& X) {
  const int n = static_cast<int>(F.rows() / 2);
  require(X.size() == 2 * n, "gamma_form: dimension mismatch");
  Mat J = standard_symplectic_form(n);
  CVec v = X.cast<cplx>() - I1 * (J * X).cast<cplx>();
  return 0.25 * ((v.transpose() * K_F(F) * v)(0) - X.squaredNorm());
}

double gamma_bound(const Mat& F, const Vec& X) {
  double sF = max_eigenvalue(Mat(F * F.transpose()));
  return -X.squaredNorm() / (2 * (1 + sF));
}

cplx product_matrix_element(const SymplecticPath& path1, const SymplecticPath& path2,
                            const Vec& z, const Vec& X) {
  GaussianState s0 = GaussianState::coherent(z);
  GaussianState s2 = propagate(path2, s0).back();
  GaussianState s12 = propagate(path1, s2).back();
  return overlap(GaussianState::coherent(z + X), s12);
}

int compose_sign(const SymplecticPath& path1, const SymplecticPath& path2,
                 const SymplecticPath& path12) {
  require(path1.n() == path2.n() && path2.n() == path12.n(), "compose_sign: dimension mismatch");
  const Mat& F12 = path12.back();
  const Mat F1F2 = path1.back() * path2.back();
  if (inf_norm(Mat(F1F2 - F12)) > 1e-8 * std::max(1.0, inf_norm(F12)))
    throw std::invalid_argument("compose_sign: path12 does not end at F1·F2");
  MetaplecticBranch b12 = metaplectic_branch(path12);
  const int n = path12.n();
  std::vector<std::pair<Vec, Vec>> probes;
  probes.push_back({Vec::Zero(2 * n), Vec::Zero(2 * n)});
  for (int k = 1; k <= 4; ++k) {
    Vec z = Vec::Zero(2 * n), X = Vec::Zero(2 * n);
    z(0) = 0.4 * k;
    z(2 * n - 1) = -0.2 * k;
    X(n) = 0.3 * k;
    X(n - 1) = -0.25 * k;
    probes.push_back({z, X});
  }
  int sign = 0;
  for (const auto& [z, X] : probes) {
    cplx m12 = matrix_element(b12, z, X);
    if (std::abs(m12) < 1e-12) continue;
    cplx ratio = product_matrix_element(path1, path2, z, X) / m12;
    int s = std::abs(ratio - 1.0) < 1e-6 ? 1 : std::abs(ratio + 1.0) < 1e-6 ? -1 : 0;
    if (s == 0) throw NumericalError("compose_sign: operator ratio is not ±1");
    if (sign != 0 && s != sign) throw NumericalError("compose_sign: sign differs across probes");
    sign = s;
  }
  if (sign == 0) throw NumericalError("compose_sign: every probe matrix element is below 1e-12");
  return sign;
}

SymplecticPath det_negative_path(int nodes) {
  auto f = [](double t) {
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 1 + t;
    D(1, 1) = 1 / (1 + t);
    return Mat(rotation(pi * t) * D);
  };
  return SymplecticPath::from_function(f, 0.0, 1.0, nodes);
}

SymplecticPath rotation_path(int n, double t1, int nodes) {
  Mat J = standard_symplectic_form(n);
  return SymplecticPath::from_function([J](double t) { return expm(Mat(t * J)); }, 0.0, t1,
                                       nodes);
}

}  // namespace qhdyn
