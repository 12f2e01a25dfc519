#include "qhdyn/coherent.hpp"

#include <cmath>

namespace qhdyn {

namespace {

const cplx I1(0.0, 1.0);

bool starts_at_identity(const SymplecticPath& path) {
  const Mat& F0 = path.front();
  return inf_norm(Mat(F0 - Mat::Identity(F0.rows(), F0.cols()))) <= 1e-9;
}

}  // namespace

double gaussian_normalization(const SiegelPoint& gamma, double hbar) {
  const double n = static_cast<double>(gamma.rows());
  double d = Mat(gamma.imag()).determinant();
  require(d > 0, "Im Γ must be positive definite");
  return std::pow(pi * hbar, -n / 4) * std::pow(d, 0.25);
}

GaussianState GaussianState::squeezed(const PhasePoint& z, const SiegelPoint& gamma,
                                      double hbar) {
  require(hbar > 0, "hbar must be positive");
  require(z.size() == 2 * gamma.rows(), "state: center and Γ dimensions differ");
  SiegelReport rep = verify_siegel(gamma);
  require(rep.pass, "state: Γ is not in the Siegel space");
  GaussianState s;
  s.n = static_cast<int>(gamma.rows());
  s.hbar = hbar;
  s.z = z;
  s.gamma = symmetrize(gamma);
  s.a = gaussian_normalization(s.gamma, hbar);
  return s;
}

GaussianState GaussianState::coherent(const PhasePoint& z, double hbar) {
  require(z.size() % 2 == 0 && z.size() > 0, "state: center must have even length");
  Eigen::Index n = z.size() / 2;
  return squeezed(z, CMat(I1 * CMat::Identity(n, n)), hbar);
}

GaussianState GaussianState::ground(int n, double hbar) {
  return coherent(Vec::Zero(2 * n), hbar);
}

cplx GaussianState::plain_amplitude() const {
  return a * std::exp(I1 * q().dot(p()) / (2 * hbar));
}

double GaussianState::norm() const {
  return std::abs(a) / gaussian_normalization(gamma, hbar);
}

CVec wavefunction(const GaussianState& s, const Mat& xs) {
  require(xs.rows() == s.n, "wavefunction: points must be n-dimensional");
  CVec out(xs.cols());
  Vec q = s.q(), p = s.p();
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    Vec x = xs.col(j);
    CVec y = (x - q).cast<cplx>();
    cplx quad = y.dot(s.gamma * y);  // Vector::dot conjugates its left argument; y is real
    out(j) = s.a * std::exp(I1 / s.hbar * (p.dot(x) - q.dot(p) / 2) + I1 / (2 * s.hbar) * quad);
  }
  return out;
}

TranslateComposition translate_compose(const PhasePoint& z, const PhasePoint& zp, double hbar) {
  require(z.size() == zp.size(), "translate_compose: dimension mismatch");
  return {std::exp(I1 * sigma(z, zp) / (2 * hbar)), z + zp};
}

cplx overlap(const GaussianState& s1, const GaussianState& s2) {
  require(s1.n == s2.n && std::abs(s1.hbar - s2.hbar) <= 1e-15 * s1.hbar,
          "overlap: states must share n and hbar");
  const double h = s1.hbar;
  const CMat G1 = s1.gamma.conjugate(), G2 = s2.gamma;
  const CVec q1 = s1.q().cast<cplx>(), p1 = s1.p().cast<cplx>();
  const CVec q2 = s2.q().cast<cplx>(), p2 = s2.p().cast<cplx>();
  // conj(φ1)φ2 = conj(a1)a2·exp(−½xᵀPx + bᵀx + c)
  CMat P = -I1 / h * (G2 - G1);
  CVec b = (I1 / h) * (-(G2 * q2) + G1 * q1 + p2 - p1);
  cplx c = I1 / (2 * h) * (q2.transpose() * G2 * q2)(0) -
           I1 / (2 * h) * (q1.transpose() * G1 * q1)(0) - I1 / (2 * h) * (q2.transpose() * p2)(0) +
           I1 / (2 * h) * (q1.transpose() * p1)(0);
  CVec Pib = P.partialPivLu().solve(b);
  cplx e = c + 0.5 * (b.transpose() * Pib)(0);
  double n = s1.n;
  return std::conj(s1.a) * s2.a * std::pow(2 * pi, n / 2) * det_pow_minus_half_re_pos(P) *
         std::exp(e);
}

std::vector<GaussianState> propagate(const SymplecticPath& path, const GaussianState& s0,
                                     const PropagateOptions& opt) {
  require(path.n() == s0.n, "propagate: path and state dimensions differ");
  require(starts_at_identity(path), "propagate: path must start at the identity");
  const CMat G0 = s0.gamma;
  const bool ground_gamma =
      inf_norm(CMat(G0 - I1 * CMat::Identity(s0.n, s0.n))) <= 1e-14;
  std::vector<double> args;
  if (ground_gamma) {
    args = path.arg_det();
  } else {
    auto f = [&G0](const Mat& F) {
      Blocks b = split_blocks(F);
      return CMat(b.A.cast<cplx>() + b.B.cast<cplx>() * G0).determinant();
    };
    args = track_argument(path, f, opt.max_arg_step, opt.max_depth).node_arg;
  }
  std::vector<GaussianState> out;
  out.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Mat& F = path.matrices()[k];
    MoebiusResult m = moebius(F, G0);
    GaussianState s = s0;
    s.z = F * s0.z;
    s.gamma = m.gamma;
    cplx root_inv = opt.principal_branch
                        ? 1.0 / std::sqrt(m.det)
                        : std::pow(std::abs(m.det), -0.5) * std::exp(-0.5 * I1 * args[k]);
    s.a = s0.a * root_inv;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

CMat riccati_rhs(const HamiltonianBlocks& b, const CMat& G) {
  CMat Gc = b.G.cast<cplx>(), Lc = b.L.cast<cplx>(), Kc = b.K.cast<cplx>();
  return -Gc - Lc.transpose() * G - G * Lc - G * Kc * G;
}

CMat riccati_step(const QuadraticHamiltonian& H, double t, double h, const CMat& G) {
  CMat k1 = riccati_rhs(H.blocks(t), G);
  CMat k2 = riccati_rhs(H.blocks(t + h / 2), G + h / 2 * k1);
  CMat k3 = riccati_rhs(H.blocks(t + h / 2), G + h / 2 * k2);
  CMat k4 = riccati_rhs(H.blocks(t + h), G + h * k3);
  return symmetrize(CMat(G + h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
}

bool in_siegel(const CMat& G) {
  return G.allFinite() && min_eigenvalue(Mat(G.imag())) > 0;
}

}  // namespace

std::vector<SiegelPoint> riccati_integrate(const QuadraticHamiltonian& H, const SiegelPoint& g0,
                                           double t0, const std::vector<double>& times,
                                           const RiccatiOptions& opt) {
  require(g0.rows() == H.n(), "riccati: dimension mismatch");
  require(verify_siegel(g0).pass, "riccati: Γ0 is not in the Siegel space");
  std::vector<SiegelPoint> out;
  CMat G = g0;
  double t = t0;
  for (double target : times) {
    require(target >= t, "riccati: sample times must be increasing from t0");
    while (t < target) {
      double h = std::min(opt.max_step, target - t);
      int halvings = 0;
      CMat next = riccati_step(H, t, h, G);
      while (!in_siegel(next)) {
        if (++halvings > opt.max_halvings)
          throw NumericalError("riccati: Im Γ lost positivity at t = " + std::to_string(t));
        h /= 2;
        next = riccati_step(H, t, h, G);
      }
      G = next;
      t += h;
      if (target - t <= 1e-14 * std::max(1.0, std::abs(target))) t = target;
    }
    out.push_back(G);
  }
  return out;
}

SiegelPoint riccati_integrate(const QuadraticHamiltonian& H, const SiegelPoint& g0, double t0,
                              double t1, const RiccatiOptions& opt) {
  return riccati_integrate(H, g0, t0, std::vector<double>{t1}, opt).front();
}

Vec wigner(const GaussianState& s, const Mat& pts) {
  require(pts.rows() == 2 * s.n, "wigner: points must be 2n-dimensional");
  const double h = s.hbar;
  const Mat R = s.gamma.real(), S = s.gamma.imag();
  Eigen::LLT<Mat> llt(S);
  require(llt.info() == Eigen::Success, "wigner: Im Γ not positive definite");
  double pref = std::norm(s.a) * std::pow(4 * pi * h, s.n / 2.0) / std::sqrt(S.determinant());
  Vec out(pts.cols());
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    Vec y = pts.col(j).head(s.n) - s.q();
    Vec w = pts.col(j).tail(s.n) - s.p() - R * y;
    out(j) = pref * std::exp(-(y.dot(S * y) + w.dot(llt.solve(w))) / h);
  }
  return out;
}

}  // namespace qhdyn
