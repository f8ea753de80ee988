#include "monodromize/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace monodromize {

double estimate_mu(const Sampler& w, double x0, double h) {
  double slope = -INFINITY;
  bool any = false;
  for (double dx : {0.0, 0.5 * h}) {
    for (int sgn : {1, -1}) {
      double a = std::abs(w(cplx(x0 + dx, 8.0 * sgn)));
      double b = std::abs(w(cplx(x0 + dx, 11.0 * sgn)));
      double c = std::abs(w(cplx(x0 + dx, 14.0 * sgn)));
      if (!(a > 1e-300 && b > 1e-300 && c > 1e-300)) continue;
      any = true;
      double s = (std::log(c) - std::log(a)) / 6.0;
      slope = std::max(slope, s);
    }
  }
  if (!any) return 1.0;
  return std::clamp(1.0 - slope, 0.05, 1.0);
}

double truncation_height(double mu, double tail_tol) { return std::min(60.0, std::log(1.0 / tail_tol) / mu); }

cplx KernelOp::theta(cplx x) { return cot_plus_i(x); }

double KernelOp::log_weight(cplx z) const {
  double y = z.imag();
  double lp = (1.0 - mu_) * std::abs(y);
  if (y <= 0) lp += 2.0 * PI * std::abs(y) / h_;
  return lp;
}

cplx KernelOp::kappa(cplx z, const std::array<cplx, 2>& mz, const std::array<cplx, 2>& mtz, cplx zeta,
                     const std::array<cplx, 2>& mzeta, const std::array<cplx, 2>& mtzeta, cplx wzeta) const {
  const cplx pre = 1.0 / (2.0 * I * h_ * W_);
  if (std::abs(zeta - z) < 1e-12 * (1.0 + std::abs(z)))
    return pre * (h_ / PI) * (mz[0] * mtz[1] - mz[1] * mtz[0]) * wzeta;
  return pre * theta(PI * (zeta - z) / h_) * (mz[0] * mtzeta[0] - mzeta[0] * mtz[0]) * wzeta;
}

cplx KernelOp::kappa(cplx z, cplx zeta) const {
  return kappa(z, model_->m_eval(z), model_->mt_eval(z), zeta, model_->m_eval(zeta), model_->mt_eval(zeta), w_(zeta));
}

KernelOp::KernelOp(std::shared_ptr<const ModelPair> model, Sampler w, Contour gamma, double mu)
    : model_(std::move(model)), w_(std::move(w)), gamma_(std::move(gamma)), mu_(mu) {
  h_ = model_->params().h;
  W_ = model_->wronskian_closed();
  const size_t N = gamma_.size();
  if (log_weight(cplx(0, -gamma_.T)) > 1400 || log_weight(cplx(0, gamma_.T)) > 1400)
    throw Error(Errc::WeightOverflow, "weight overflows at the truncation height; reduce T");
  mn_.resize(N);
  mtn_.resize(N);
  wn_.resize(N);
  sp_.resize(N);
  trivial_ = true;
  for (size_t j = 0; j < N; ++j) {
    cplx z = gamma_.nodes[j];
    wn_[j] = w_(z);
    sp_[j] = std::exp(0.5 * log_weight(z));
    if (wn_[j] != 0.0) trivial_ = false;
  }
  K_ = Eigen::MatrixXcd::Zero(N, N);
  if (trivial_) return;
  for (size_t j = 0; j < N; ++j) {
    mn_[j] = model_->m_eval(gamma_.nodes[j]);
    mtn_[j] = model_->mt_eval(gamma_.nodes[j]);
  }
  for (size_t i = 0; i < N; ++i) {
    const cplx zi = gamma_.nodes[i];
    const double yi = std::abs(zi.imag());
    for (size_t j = 0; j < N; ++j) {
      const cplx zj = gamma_.nodes[j];
      cplx k = kappa(zi, mn_[i], mtn_[i], zj, mn_[j], mtn_[j], wn_[j]);
      K_(i, j) = k * gamma_.weights[j];
      double yj = std::abs(zj.imag());
      double wk = std::abs(k) * sp_[i] / sp_[j];
      bound_ = std::max(bound_, wk / ((1.0 + yj) * std::exp(-0.5 * mu_ * (yi + yj))));
    }
  }
}

namespace {

size_t nearest_node(const Contour& c, cplx z) {
  auto it = std::lower_bound(c.node_y.begin(), c.node_y.end(), z.imag());
  size_t i = size_t(it - c.node_y.begin());
  size_t best = std::min(i, c.size() - 1);
  if (i > 0 && std::abs(c.nodes[i - 1] - z) < std::abs(c.nodes[best] - z)) best = i - 1;
  return best;
}

}  // namespace

FredholmSolution::Functional FredholmSolution::functional(const KernelOp& K, const std::vector<ExtZero>& zeros, cplx z,
                                                          int depth) {
  const Contour& g = K.contour();
  const size_t N = g.size(), J = zeros.size();
  const double h = K.h();
  Functional F;
  F.node = Eigen::RowVectorXcd::Zero(N);
  F.sigma_coef = Eigen::RowVectorXcd::Zero(J);
  const double d = g.offset(z);
  if (std::abs(d) >= 2.0 * h) throw Error(Errc::OutOfVicinity, "point is two steps or more from the contour", z);
  if (depth > 4) throw Error(Errc::QuadratureFail, "continuation recursion too deep", z);
  size_t jn = nearest_node(g, z);
  if (std::abs(g.nodes[jn] - z) < 1e-12 * (1.0 + std::abs(z))) {
    F.node(jn) = 1.0;
    return F;
  }
  const ModelPair& mp = K.model();
  auto mz = mp.m_eval(z), mtz = mp.mt_eval(z);
  F.delta_coef = mz[0];
  for (size_t l = 0; l < J; ++l) F.sigma_coef(l) = zeros[l].s * mp.pole_eval(z, zeros[l].z0);
  if (K.trivial()) return F;
  for (size_t j = 0; j < N; ++j)
    F.node(j) = K.kappa(z, mz, mtz, g.nodes[j], K.m_node(j), K.mt_node(j), K.w_node(j)) * g.weights[j];

  // poles of theta at zeta = z - k h: residues for the ones that crossed the
  // contour, subtraction for the ones close to it
  for (int k = -3; k <= 3; ++k) {
    if (k == 0) continue;
    double dk = d - k * h;
    if (std::abs(dk) < 1e-12 * h) dk = 0.0;
    bool crossed = (k > 0 && dk > 0) || (k < 0 && dk < 0);
    bool near = std::abs(dk) < 0.5 * h;
    if (!crossed && !near) continue;
    cplx zk = z - double(k) * h;
    if (near && std::abs(g.nodes[nearest_node(g, zk)] - zk) < 1e-8 * h) {
      // the subtraction would divide by ~0: mean over a small circle instead
      Functional M;
      M.node = Eigen::RowVectorXcd::Zero(N);
      M.sigma_coef = Eigen::RowVectorXcd::Zero(J);
      const int P = 8;
      for (int q = 0; q < P; ++q) {
        Functional Fq = functional(K, zeros, z + std::polar(0.01 * h, 2 * PI * (q + 0.3) / P), depth + 1);
        M.node += Fq.node / double(P);
        M.delta_coef += Fq.delta_coef / double(P);
        M.sigma_coef += Fq.sigma_coef / double(P);
      }
      return M;
    }
    Functional Fk = functional(K, zeros, zk, depth + 1);
    auto mk = mp.m_eval(zk), mtk = mp.mt_eval(zk);
    cplx R = (h / PI) * (mz[0] * mtk[0] - mk[0] * mtz[0]) * K.w(zk) / (2.0 * I * h * K.W());
    cplx c = 0.0;
    if (crossed) c += (k > 0 ? 1.0 : -1.0) * 2.0 * PI * I;
    if (near) {
      cplx S = 0.0;
      for (size_t j = 0; j < N; ++j) S += g.weights[j] / (g.nodes[j] - zk);
      c += g.log_integral(zk, dk == 0.0 ? (k > 0 ? -1 : 1) : 0) - S;
    }
    c *= R;
    F.node += c * Fk.node;
    F.delta_coef += c * Fk.delta_coef;
    F.sigma_coef += c * Fk.sigma_coef;
  }
  return F;
}

cplx FredholmSolution::operator()(cplx z) const {
  Functional F = functional(*K_, zeros_, z);
  cplx v = (F.node * psi_)(0) + F.delta_coef * double(delta_);
  if (!zeros_.empty()) v += (F.sigma_coef * sig_)(0);
  return v;
}

AsympCoeffs FredholmSolution::asymptotics() const {
  const KernelOp& K = *K_;
  const Contour& g = K.contour();
  const double h = K.h();
  const cplx W = K.W();
  AsympCoeffs r;
  cplx Ia = 0.0, Ib = 0.0, Id = 0.0;
  if (!K.trivial()) {
    for (size_t j = 0; j < g.size(); ++j) {
      cplx f = g.weights[j] * K.w_node(j) * psi_(j);
      Ia += K.mt_node(j)[0] * f;
      Ib += K.m_node(j)[0] * f;
      Id += std::exp(2.0 * PI * I * g.nodes[j] / h) * K.m_node(j)[0] * f;
    }
  }
  r.A = double(delta_) + Ia / (W * h);
  r.B = -Ib / (W * h);
  r.C = double(delta_);
  r.D = Id / (W * h);
  const ModelPair& mp = K.model();
  for (size_t l = 0; l < zeros_.size(); ++l) {
    cplx z1 = zeros_[l].z0 + h;
    cplx q = zeros_[l].s * sig_(l) * 2.0 * I / W;
    cplx m1 = mp.m(z1);
    r.A += q * mp.mt(z1);
    r.B -= q * m1;
    r.D += q * std::exp(2.0 * PI * I * zeros_[l].z0 / h) * m1;
  }
  ModelCoeffs c0 = mp.m_solution().coeffs();
  ModelCoeffs cc = mp.partner_solution().coeffs();
  r.a = r.A * c0.a0;
  r.b = r.A * c0.b0 + r.B * std::conj(cc.c0);
  r.c = r.C * c0.c0;
  r.d = r.C * c0.d0 + r.D * std::conj(cc.a0);
  return r;
}

namespace {

double spectral_norm(const Eigen::MatrixXcd& A) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(A.cols());
  for (auto& v : x) v = cplx(nd(rng), nd(rng));
  double s = 0.0;
  for (int it = 0; it < 30; ++it) {
    x.normalize();
    Eigen::VectorXcd y = A.adjoint() * (A * x);
    double s2 = std::sqrt(y.norm());
    if (it > 3 && std::abs(s2 - s) < 1e-6 * s2) return s2;
    s = s2;
    x = y;
  }
  return s;
}

// smallest singular value and its right singular vector, by inverse iteration
double smallest_singular(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, Eigen::Index n, Eigen::VectorXcd& v) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  v.resize(n);
  for (auto& e : v) e = cplx(nd(rng), nd(rng));
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXcd y = lu.solve(lu.adjoint().solve(v));
    double l2 = y.norm();
    if (!std::isfinite(l2)) return 0.0;
    v = y / l2;
    if (it > 2 && std::abs(l2 - lam) < 1e-10 * l2) {
      lam = l2;
      break;
    }
    lam = l2;
  }
  return 1.0 / std::sqrt(lam);
}

}  // namespace

FredholmSolution solve(std::shared_ptr<const KernelOp> K, Rhs rhs, const SolveOptions& opt) {
  return solve_extended(std::move(K), {}, rhs, opt);
}

FredholmSolution solve_extended(std::shared_ptr<const KernelOp> Kp, const std::vector<ExtZero>& zeros, Rhs rhs,
                                const SolveOptions& opt) {
  const KernelOp& K = *Kp;
  const Contour& g = K.contour();
  const Eigen::Index N = Eigen::Index(g.size()), J = Eigen::Index(zeros.size()), n = N + J;
  const ModelPair& mp = K.model();
  const Eigen::VectorXd& sp = K.sqrt_weight();

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) A(i, j) -= sp(i) * K.matrix()(i, j) / sp(j);
    b(i) = sp(i) * (K.trivial() ? mp.m(g.nodes[i]) : K.m_node(size_t(i))[0]);
    for (Eigen::Index l = 0; l < J; ++l) A(i, N + l) -= sp(i) * zeros[l].s * mp.pole_eval(g.nodes[i], zeros[l].z0);
  }
  for (Eigen::Index l = 0; l < J; ++l) {
    auto F = FredholmSolution::functional(K, zeros, zeros[l].z0 + K.h());
    for (Eigen::Index j = 0; j < N; ++j) A(N + l, j) -= F.node(j) / sp(j);
    for (Eigen::Index k = 0; k < J; ++k) A(N + l, N + k) -= F.sigma_coef(k);
    b(N + l) = F.delta_coef;
  }

  FredholmSolution S;
  S.K_ = Kp;
  S.zeros_ = zeros;
  if (K.trivial() && J == 0 && rhs == Rhs::Model) {
    S.psi_.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) S.psi_(i) = mp.m(g.nodes[i]);
    S.smin_ = 1.0;
    S.stol_ = opt.sing_rel;
    return S;
  }
  const double norm = spectral_norm(A);
  S.stol_ = opt.sing_rel * norm;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  Eigen::VectorXcd v;
  S.smin_ = smallest_singular(lu, n, v);
  bool singular = S.smin_ < S.stol_;
  if (singular && !v.allFinite()) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    S.smin_ = svd.singularValues()(n - 1);
    v = svd.matrixV().col(n - 1);
  }
  Eigen::VectorXcd u;
  if (rhs == Rhs::Model && !singular) {
    S.delta_ = 1;
    u = lu.solve(b);
    S.residual_ = (A * u - b).norm() / u.norm();
  } else {
    if (!singular) throw Error(Errc::Degenerate, "I - K is regular: the homogeneous equation has only the zero solution");
    S.delta_ = 0;
    u = v;
    S.residual_ = (A * u).norm() / u.norm();
  }
  if (!(u.norm() > 0) || !u.allFinite()) throw Error(Errc::Degenerate, "solver returned the zero vector");
  S.psi_.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) S.psi_(i) = u(i) / sp(i);
  S.sig_ = u.tail(J);

  // f(z0 + h) recomputed from a Cauchy mean over a small circle
  for (Eigen::Index l = 0; l < J; ++l) {
    cplx c = zeros[l].z0 + K.h();
    const int M = 16;
    double r = 0.1 * K.h();
    cplx mean = 0.0;
    for (int k = 0; k < M; ++k) mean += S(c + std::polar(r, 2 * PI * k / M));
    mean /= double(M);
    if (std::abs(mean - S.sig_(l)) > opt.coupling_tol * std::max(1.0, std::abs(mean)))
      throw Error(Errc::CouplingMismatch, "coupling unknown differs from f(z0 + h)", zeros[l].z0);
  }
  return S;
}

Eigen::VectorXcd neumann_iterate(const KernelOp& K, int max_iter, double tol, int* iterations) {
  const Eigen::Index N = Eigen::Index(K.size());
  const Eigen::VectorXd& sp = K.sqrt_weight();
  Eigen::MatrixXcd Ks = sp.asDiagonal() * K.matrix() * sp.cwiseInverse().asDiagonal();
  Eigen::VectorXcd b(N);
  for (Eigen::Index i = 0; i < N; ++i)
    b(i) = sp(i) * (K.trivial() ? K.model().m(K.contour().nodes[i]) : K.m_node(size_t(i))[0]);
  Eigen::VectorXcd x = b;
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::VectorXcd y = b + Ks * x;
    double dn = (y - x).norm();
    x = y;
    if (dn < tol * x.norm()) break;
  }
  if (iterations) *iterations = it;
  return x.cwiseQuotient(sp.cast<cplx>());
}

}  // namespace monodromize
