#include "monodromize/trigpoly.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace monodromize {

TrigPoly::TrigPoly(std::map<int, cplx> coeffs) : c_(std::move(coeffs)) { prune(); }

TrigPoly TrigPoly::constant(cplx c) { return TrigPoly({{0, c}}); }
TrigPoly TrigPoly::monomial(int l, cplx c) { return TrigPoly({{l, c}}); }
TrigPoly TrigPoly::cos_term(int l, cplx amp) {
  if (l == 0) return constant(amp);
  return TrigPoly({{l, amp / 2.0}, {-l, amp / 2.0}});
}

void TrigPoly::prune() {
  double mx = 0.0;
  for (auto& [l, v] : c_) mx = std::max(mx, std::abs(v));
  for (auto it = c_.begin(); it != c_.end();) {
    if (std::abs(it->second) <= drop_tol * mx || it->second == cplx(0.0))
      it = c_.erase(it);
    else
      ++it;
  }
}

cplx TrigPoly::coeff(int l) const {
  auto it = c_.find(l);
  return it == c_.end() ? cplx(0.0) : it->second;
}

int TrigPoly::min_index() const {
  if (c_.empty()) throw Error(Errc::ZeroPolynomial, "empty trigonometric polynomial");
  return c_.begin()->first;
}

int TrigPoly::max_index() const {
  if (c_.empty()) throw Error(Errc::ZeroPolynomial, "empty trigonometric polynomial");
  return c_.rbegin()->first;
}

cplx TrigPoly::operator()(cplx z) const {
  cplx s = 0.0;
  for (auto& [l, v] : c_) s += v * std::exp(I * (double)l * z);
  return s;
}

cplx TrigPoly::derivative(cplx z) const {
  cplx s = 0.0;
  for (auto& [l, v] : c_) s += I * (double)l * v * std::exp(I * (double)l * z);
  return s;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  auto r = c_;
  for (auto& [l, v] : o.c_) r[l] += v;
  return TrigPoly(std::move(r));
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const { return *this + (-o); }

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
  std::map<int, cplx> r;
  for (auto& [l, v] : c_)
    for (auto& [k, u] : o.c_) r[l + k] += v * u;
  return TrigPoly(std::move(r));
}

TrigPoly TrigPoly::operator*(cplx s) const {
  auto r = c_;
  for (auto& [l, v] : r) v *= s;
  return TrigPoly(std::move(r));
}

TrigPoly TrigPoly::operator-() const { return *this * cplx(-1.0); }

cplx tp_eval(const TrigPoly& f, cplx z) { return f(z); }

TPIndices tp_indices(const TrigPoly& f) {
  if (f.is_zero()) throw Error(Errc::ZeroPolynomial, "indices of the zero polynomial");
  int lo = f.min_index(), hi = f.max_index();
  return {-lo, f.coeff(lo), hi, f.coeff(hi)};
}

TrigPoly tp_shift(const TrigPoly& f, cplx delta) { return tp_affine(f, 1, delta); }

TrigPoly tp_affine(const TrigPoly& f, int k, cplx c) {
  std::map<int, cplx> r;
  for (auto& [l, v] : f.coeffs()) r[l * k] = v * std::exp(I * (double)l * c);
  return TrigPoly(std::move(r));
}

std::vector<cplx> tp_roots(const TrigPoly& f, double re_lo) {
  if (f.is_zero()) throw Error(Errc::ZeroPolynomial, "roots of the zero polynomial");
  int lo = f.min_index(), hi = f.max_index();
  int deg = hi - lo;
  std::vector<cplx> out;
  if (deg == 0) return out;
  // u^{-lo} f as a polynomial in u = e^{iz}; monic companion matrix
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
  cplx lead = f.coeff(hi);
  for (int j = 0; j < deg; ++j) C(0, j) = -f.coeff(hi - 1 - j) / lead;
  for (int j = 1; j < deg; ++j) C(j, j - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  for (int j = 0; j < deg; ++j) {
    cplx u = es.eigenvalues()[j];
    cplx z = -I * std::log(u);
    for (int it = 0; it < 4; ++it) {
      cplx d = f.derivative(z);
      if (std::abs(d) < 1e-300) break;
      cplx dz = f(z) / d;
      if (!std::isfinite(dz.real()) || std::abs(dz) > 1e-3) break;
      z -= dz;
    }
    double x = z.real();
    x -= 2 * PI * std::floor((x - re_lo) / (2 * PI));
    out.emplace_back(x, z.imag());
  }
  std::sort(out.begin(), out.end(), [](cplx p, cplx q) { return p.real() < q.real(); });
  return out;
}

MatrixTrigPoly::MatrixTrigPoly(TrigPoly a_, TrigPoly b_, TrigPoly c_, TrigPoly d_, double det_tol)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {
  if (b.is_zero()) throw Error(Errc::ZeroB, "matrix entry b vanishes identically");
  double r = det_residual();
  if (r > det_tol) throw Error(Errc::Degenerate, "det M differs from 1 by " + std::to_string(r));
}

Eigen::Matrix2cd MatrixTrigPoly::operator()(cplx z) const {
  Eigen::Matrix2cd m;
  m << a(z), b(z), c(z), d(z);
  return m;
}

TrigPoly MatrixTrigPoly::det() const { return a * d - b * c; }

double MatrixTrigPoly::det_residual() const {
  double r = 0.0;
  for (int k = 0; k < 64; ++k) {
    cplx z = 2 * PI * k / 64.0;
    r = std::max(r, std::abs(a(z) * d(z) - b(z) * c(z) - 1.0));
  }
  return r;
}

RatioTrig::RatioTrig(TrigPoly n, TrigPoly d) : num(std::move(n)), den(std::move(d)) {
  if (den.is_zero()) throw Error(Errc::ZeroPolynomial, "zero denominator");
}

RhoV rho_v(const MatrixTrigPoly& M, double h) {
  if (M.b.is_zero()) throw Error(Errc::ZeroB, "b vanishes identically");
  TrigPoly bs = tp_shift(M.b, -h);
  TrigPoly ds = tp_shift(M.d, -h);
  return {RatioTrig(M.b, bs), RatioTrig(M.a * bs + M.b * ds, bs)};
}

namespace {
bool in_tau(const TrigPoly& f, int m, int l) {
  if (f.is_zero()) return true;
  auto ix = tp_indices(f);
  return ix.n_minus <= l && ix.n_plus <= m;
}
}  // namespace

OmegaReport omega_classify(const MatrixTrigPoly& M, int n) {
  OmegaReport r;
  r.n = n;
  r.a_in_tau = in_tau(M.a, n, n);
  r.b_in_tau = in_tau(M.b, n, n - 1);
  r.c_in_tau = in_tau(M.c, n - 1, n);
  r.d_in_tau = in_tau(M.d, n - 1, n - 1);
  if (!M.a.is_zero()) {
    auto ix = tp_indices(M.a);
    r.a_orders = ix.n_plus == n && ix.n_minus == n;
  }
  if (!M.b.is_zero()) {
    auto ix = tp_indices(M.b);
    r.stratum_m = ix.n_plus;
    r.stratum_l = ix.n_minus;
  }
  r.member = r.a_in_tau && r.b_in_tau && r.c_in_tau && r.d_in_tau && r.a_orders;
  return r;
}

CFExpansion cf_expand(double h, int max_depth, double rational_tol) {
  if (!(h > 0.0 && h < 2 * PI)) throw Error(Errc::BadStep, "step must lie in (0, 2pi)");
  CFExpansion cf;
  cf.h_seq = {2 * PI, h};
  for (int j = 0; j < max_depth; ++j) {
    double hp = cf.h_seq[cf.h_seq.size() - 2];
    double hc = cf.h_seq.back();
    long p = (long)std::floor(hp / hc);
    double r = hp - p * hc;
    if (hc - r < rational_tol * hp) {
      // remainder is a full h_j up to rounding
      ++p;
      r = 0.0;
    }
    if (r < rational_tol * hp) r = 0.0;
    cf.p.push_back(p);
    cf.h_seq.push_back(r);
    if (r == 0.0) {
      cf.terminated = true;
      break;
    }
  }
  return cf;
}

}  // namespace monodromize
