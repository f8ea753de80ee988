#include "monodromize/bloch.hpp"

#include <cmath>

namespace monodromize {

namespace {

struct Lead {
  int n;
  cplx c;
};

Lead lead_of(const TrigPoly& f, Side side) {
  auto ix = tp_indices(f);
  return side == Side::Plus ? Lead{ix.n_plus, ix.f_plus} : Lead{ix.n_minus, ix.f_minus};
}

// arg in (-pi, pi], also for a negative real with a signed zero imaginary part
cplx principal_log(cplx c) {
  double a = std::arg(c);
  if (a <= -PI) a = PI;
  return cplx(std::log(std::abs(c)), a);
}

}  // namespace

RiccatiSolution::RiccatiSolution(const RhoV& rv, double h, Side side, BlochOptions opt)
    : rv_(rv), h_(h), side_(side), opt_(opt) {
  if (!(h > 0.0)) throw Error(Errc::BadStep, "step must be positive");
  Lead ln = lead_of(rv_.v.num, side), ld = lead_of(rv_.v.den, side);
  n_v_ = ln.n - ld.n;
  v_lead_ = ln.c / ld.c;
  if (n_v_ < 1) throw Error(Errc::NoContraction, "v does not grow towards this side");
  const double sgn = side == Side::Plus ? 1.0 : -1.0;
  const int nx = 64;
  for (double Y = 0.0; Y <= opt_.y_max; Y += opt_.y_step) {
    double vmin = 1e300, rmax = 0.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
      for (int j = 0; j < nx; ++j) {
        cplx z(2 * PI * j / nx, sgn * (Y + t));
        vmin = std::min(vmin, std::abs(v(z)));
        rmax = std::max(rmax, std::abs(rho(z)));
      }
    double mu = rmax / (0.25 * vmin * vmin);
    if (std::isfinite(mu) && mu < 1.0) {
      Y_ = Y;
      mu_ = mu;
      return;
    }
  }
  throw Error(Errc::NoContraction, "no height below the cap gives mu < 1");
}

cplx RiccatiSolution::phi2_depth(cplx z, int depth) const {
  cplx t = v(z - (double)depth * h_);
  for (int k = depth - 1; k >= 0; --k) t = v(z - (double)k * h_) - rho(z - (double)k * h_) / t;
  return t;
}

cplx RiccatiSolution::phi1_depth(cplx z, int depth) const {
  cplx t = v(z + (double)depth * h_);
  for (int k = depth - 1; k >= 1; --k) t = v(z + (double)k * h_) - rho(z + (k + 1.0) * h_) / t;
  return rho(z + h_) / t;
}

namespace {

template <class F>
cplx converge(F f, int max_depth, double tol, cplx z) {
  cplx prev = f(2);
  for (int d = 4;; d *= 2) {
    int dd = std::min(d, max_depth);
    cplx cur = f(dd);
    if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
    if (dd == max_depth) throw Error(Errc::NoContraction, "continued fraction did not settle", z);
    prev = cur;
  }
}

// samples of g carry rounding noise from the continued fractions and the exponentials
double noise_floor(double gmax, const BlochOptions& opt) { return std::max(opt.coef_tol * gmax, 1e-14); }

}  // namespace

cplx RiccatiSolution::phi2(cplx z) const {
  if (!inside(z)) throw Error(Errc::OutOfVicinity, "point below the contraction height", z);
  return converge([&](int d) { return phi2_depth(z, d); }, opt_.max_depth, opt_.tol, z);
}

cplx RiccatiSolution::phi1(cplx z) const {
  if (!inside(z)) throw Error(Errc::OutOfVicinity, "point below the contraction height", z);
  return converge([&](int d) { return phi1_depth(z, d); }, opt_.max_depth, opt_.tol, z);
}

HomologicalSolution::HomologicalSolution(const std::function<cplx(cplx)>& g, double h, Side side, double y,
                                         BlochOptions opt)
    : h_(h), y_(y), s_(side == Side::Plus ? 1.0 : -1.0) {
  std::vector<cplx> samples, C;
  double gmax = 0.0;
  for (int N = 32;; N *= 2) {
    samples.assign(N, 0.0);
    gmax = 0.0;
    for (int j = 0; j < N; ++j) {
      samples[j] = g(cplx(2 * PI * j / N, y));
      gmax = std::max(gmax, std::abs(samples[j]));
    }
    // C[k] multiplies e^{i s k (z - i y)}, k = 0 .. N/2
    C.assign(N / 2 + 1, 0.0);
    for (int k = 0; k <= N / 2; ++k) {
      cplx acc = 0.0;
      for (int j = 0; j < N; ++j) acc += samples[j] * std::exp(-I * (s_ * k * 2 * PI * j / N));
      C[k] = acc / (double)N;
    }
    double tail = 0.0;
    for (int k = N / 4; k <= N / 2; ++k) tail = std::max(tail, std::abs(C[k]));
    if (tail <= noise_floor(gmax, opt) || gmax == 0.0) break;
    if (N >= 8192) throw Error(Errc::QuadratureFail, "Fourier tail of the homological right-hand side too slow");
  }
  g0_ = C[0];
  int K = (int)C.size() - 1;
  while (K > 0 && std::abs(C[K]) <= noise_floor(gmax, opt)) --K;
  gk_.assign(C.begin() + 1, C.begin() + 1 + K);
  phik_.resize(K);
  for (int k = 1; k <= K; ++k) {
    cplx den = std::exp(I * (s_ * k * h)) - 1.0;
    if (std::abs(den) < opt.denom_guard && std::abs(C[k]) > noise_floor(gmax, opt))
      throw Error(Errc::SmallDenominator, "e^{ikh} - 1 nearly vanishes for a significant harmonic", cplx(k, 0));
    phik_[k - 1] = C[k] / den;
  }
}

cplx HomologicalSolution::operator()(cplx z) const {
  if (phik_.empty()) return 0.0;
  cplx e = std::exp(I * s_ * (z - I * y_)), p = e, acc = 0.0;
  for (cplx c : phik_) {
    acc += c * p;
    p *= e;
  }
  return acc;
}

cplx BlochBasis::principal_phi(const MatrixTrigPoly& M, double h, Side side) {
  RhoV rv = rho_v(M, h);
  Lead ln = lead_of(rv.v.num, side), ld = lead_of(rv.v.den, side), lb = lead_of(M.b, side);
  cplx vl = ln.c / ld.c;
  return side == Side::Plus ? I * principal_log(vl) - h * lb.n / 2.0 : -I * principal_log(vl) - h * lb.n / 2.0;
}

BlochBasis::BlochBasis(const MatrixTrigPoly& M, double h, Side side, std::optional<cplx> phi, BlochOptions opt)
    : M_(M), h_(h), side_(side), opt_(opt), ric_(rho_v(M, h), h, side, opt) {
  n_v_ = ric_.n_v();
  Lead lb = lead_of(M_.b, side);
  n_b_ = lb.n;
  b_lead_ = lb.c;
  phi_ = phi ? *phi : principal_phi(M, h, side);
  // exp(i phi) must reproduce v+ (or exp(-i phi) reproduces v-) up to the b shift
  cplx lv = side == Side::Plus ? -I * (phi_ + h * n_b_ / 2.0) : I * (phi_ + h * n_b_ / 2.0);
  if (std::abs(std::exp(lv) - v_lead()) > 1e-9 * std::abs(v_lead()))
    throw Error(Errc::Inconsistent, "phi is not a logarithm of the leading coefficient of v", phi_);

  const double sgn = side == Side::Plus ? 1.0 : -1.0;
  double ys = ric_.Y() + opt_.margin;
  for (int which = 1; which <= 2; ++which) {
    // residual of log Phi against the exact quadratic part; raise the line until the ratio is near 1
    auto ratio = [&](cplx z) { return Phi(which, z) / std::exp(Q(which, z + h_) - Q(which, z)); };
    double y = ys;
    for (;; y += 1.0) {
      double worst = 0.0;
      for (int j = 0; j < 64; ++j) worst = std::max(worst, std::abs(ratio(cplx(2 * PI * j / 64, sgn * y)) - 1.0));
      if (worst < 0.5) break;
      if (y > opt_.y_max + opt_.margin) throw Error(Errc::NoContraction, "Riccati solution far from its asymptotics");
    }
    hom_[which - 1] = HomologicalSolution([&](cplx z) { return std::log(ratio(z)); }, h_, side, sgn * y, opt_);
  }
}

cplx BlochBasis::Q(int which, cplx z) const {
  double n = n_v_;
  cplx w = n * z + phi_;
  double tau = side_ == Side::Plus ? 1.0 : -1.0;
  return sigma(which) * I / (2 * h_ * n) * w * w + tau * I * (n - n_b_) * z / 2.0;
}

cplx BlochBasis::Phi(int which, cplx z) const {
  bool use2 = (side_ == Side::Plus) ? (which == 2) : (which == 1);
  return use2 ? ric_.phi2(z) : ric_.phi1(z);
}

cplx BlochBasis::log_model(int which, cplx z) const { return Q(which, z); }

cplx BlochBasis::log_raw(int which, cplx z) const { return Q(which, z) + hom_[which - 1](z); }

cplx BlochBasis::det_target() const {
  return side_ == Side::Plus ? v_lead() / b_lead_ : -v_lead() / b_lead_;
}

cplx BlochBasis::log_norm(cplx z) const {
  cplx d = std::exp(log_raw(1, z) + log_raw(2, z)) * (Phi(2, z) - Phi(1, z)) / M_.b(z);
  return std::log(d / det_target());
}

cplx BlochBasis::log_first(int which, cplx z) const {
  if (!ric_.inside(z)) throw Error(Errc::OutOfVicinity, "point outside the Bloch vicinity", z);
  cplx l = log_raw(which, z);
  if (which == 1) l -= log_norm(z);
  return l;
}

cplx BlochBasis::ratio(int which, cplx z) const { return Phi(which, z); }

Eigen::Vector2cd BlochBasis::operator()(int which, cplx z) const {
  cplx f1 = first(which, z);
  Eigen::Vector2cd r;
  r << f1, f1 * (Phi(which, z) - M_.a(z)) / M_.b(z);
  return r;
}

cplx BlochBasis::det(cplx z) const {
  Eigen::Matrix2cd F;
  F.col(0) = (*this)(1, z);
  F.col(1) = (*this)(2, z);
  return F.determinant();
}

cplx BlochBasis::multiplier(int which, cplx z) const {
  return std::exp(log_first(which, z + 2 * PI) - log_first(which, z));
}

cplx BlochBasis::multiplier_closed(int which) const {
  double tau = side_ == Side::Plus ? 1.0 : -1.0;
  return std::exp(sigma(which) * 2 * PI * I / h_ * (phi_ + PI * (double)n_v_) + tau * I * PI * (double)(n_v_ - n_b_));
}

cplx BlochBasis::multiplier_leading(int which, cplx z) const {
  return multiplier(which, z) * std::exp(-sigma(which) * 2 * PI * I * (double)n_v_ * z / h_);
}

ConsistencyVerdict consistency_check(cplx phi_plus, cplx phi_minus, double h, double margin) {
  ConsistencyVerdict r{phi_plus, phi_minus, 1e300, false};
  cplx d = phi_plus - phi_minus;
  double lim = std::abs(d) + 4 * PI;
  for (int m = 0; 2 * PI + h + 2 * PI * m <= lim; ++m)
    for (int l = 0; 2 * PI + h + 2 * h * l + 2 * PI * m <= lim; ++l) {
      double s = 2 * PI + h + 2 * h * l + 2 * PI * m;
      r.distance = std::min({r.distance, std::abs(d - s), std::abs(d + s)});
    }
  r.consistent = r.distance > margin;
  return r;
}

ConsistencyVerdict consistent_phis(const MatrixTrigPoly& M, double h, double margin) {
  cplx pp = BlochBasis::principal_phi(M, h, Side::Plus);
  cplx pm = BlochBasis::principal_phi(M, h, Side::Minus);
  for (int k : {0, 1, -1, 2, -2, 3, -3}) {
    auto v = consistency_check(pp + 2 * PI * k, pm, h, margin);
    if (v.consistent) return v;
  }
  throw Error(Errc::Inconsistent, "no consistent choice of phi within three periods", pp - pm);
}

}  // namespace monodromize
