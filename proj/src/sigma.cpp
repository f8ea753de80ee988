#include "monodromize/sigma.hpp"

#include <algorithm>
#include <cmath>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_dilog.h>

namespace monodromize {

namespace {

cplx dilog(cplx w) {
  gsl_sf_result re, im;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  int st = gsl_sf_complex_dilog_xy_e(w.real(), w.imag(), &re, &im);
  gsl_set_error_handler(old);
  if (st != GSL_SUCCESS) throw Error(Errc::QuadratureFail, "dilogarithm evaluation failed", w);
  return {re.val, im.val};
}

// log(1 + e^{-iu}) on the branch that is small when Im u -> -inf
cplx log1pexp_minus(cplx u) {
  if (u.imag() <= 0.0) return std::log(1.0 + std::exp(-I * u));
  return -I * u + std::log(1.0 + std::exp(I * u));
}

void check_cut(cplx z) {
  if (z.imag() == 0.0 && std::abs(z.real()) >= PI)
    throw Error(Errc::OnCut, "point lies on a cut of the plane", z);
}

}  // namespace

cplx l0_eval(cplx z) {
  check_cut(z);
  return log1pexp_minus(z);
}

cplx L0_eval(cplx z) {
  check_cut(z);
  if (z.imag() <= 0.0) return -I * dilog(-std::exp(-I * z));
  return I * (PI * PI / 6.0) - I * z * z / 2.0 + I * dilog(-std::exp(I * z));
}

SigmaEngine::SigmaEngine(double h, SigmaOptions opt) : h_(h), opt_(opt) {
  if (!(h > 0.0)) throw Error(Errc::BadStep, "sigma step must be positive");
  double s = std::min(h, PI / 2) / 4.0;
  int J = (int)std::ceil((h + s) / s);
  std::vector<double> xs;
  for (int j = -J; j <= J; ++j) {
    double x0 = j * s;
    if (std::abs(x0) < PI - 0.5 * s && std::abs(x0) <= h + s) xs.push_back(x0);
  }
  // worst-case analyticity half-width over the reduced range |Re z| <= h
  dmin_ = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    double x = -h + 2 * h * i / 2000.0;
    double best = 0.0;
    for (double x0 : xs) best = std::max(best, std::min(h - std::abs(x - x0), PI - std::abs(x0)));
    dmin_ = std::min(dmin_, best);
  }
  deta_ = dmin_ / 6.0;
  kmax_ = (long)std::ceil(opt_.cache_height / deta_);
  for (double x0 : xs) {
    Line ln{x0, {}};
    ln.L.resize(2 * kmax_ + 1);
    for (long k = -kmax_; k <= kmax_; ++k) ln.L[k + kmax_] = L0_eval(cplx(x0, k * deta_));
    lines_.push_back(std::move(ln));
  }
}

cplx SigmaEngine::theta0_line(cplx z, double x0, double deta, const Line* line) const {
  double y = z.imag();
  double W = (h_ / PI) * (std::log(1.0 / opt_.tail_tol) + 2.0 * std::log(3.0 + std::abs(y) + 10.0 * h_) + 2.0);
  long k0 = (long)std::floor((y - W) / deta), k1 = (long)std::ceil((y + W) / deta);
  cplx ph = std::exp(I * PI * (z - x0) / h_);
  cplx phinv = 1.0 / ph;
  cplx sum = 0.0;
  for (long k = k0; k <= k1; ++k) {
    double eta = k * deta;
    cplx L;
    if (line && std::abs(k) <= kmax_)
      L = line->L[k + kmax_];
    else
      L = L0_eval(cplx(x0, eta));
    // 1/cos^2(u) = 4E/(1+E)^2 with E = e^{2iu}
    double a = PI * eta / h_;
    cplx K;
    if (a - PI * y / h_ <= 0.0) {
      cplx E = ph * std::exp(a);
      K = 4.0 * E / ((1.0 + E) * (1.0 + E));
    } else {
      cplx E = phinv * std::exp(-a);
      K = 4.0 * E / ((1.0 + E) * (1.0 + E));
    }
    sum += L * K;
  }
  return PI / (8.0 * h_ * h_) * deta * sum;
}

cplx SigmaEngine::theta0(cplx z) const {
  double x = z.real();
  if (std::abs(x) >= PI + h_) throw Error(Errc::OutOfStrip, "theta0 outside the base strip", z);
  const Line* best = nullptr;
  double bd = 0.0;
  for (auto& ln : lines_) {
    double d = std::min(h_ - std::abs(x - ln.x0), PI - std::abs(ln.x0));
    if (d > bd) {
      bd = d;
      best = &ln;
    }
  }
  if (best && bd >= dmin_ * 0.999) return theta0_line(z, best->x0, deta_, best);
  // off the reduced range: best admissible line, uncached
  double bx = 0.0;
  bd = -1.0;
  for (int i = 1; i < 4000; ++i) {
    double x0 = -PI + 2 * PI * i / 4000.0;
    double d = std::min(h_ - std::abs(x - x0), PI - std::abs(x0));
    if (d > bd) {
      bd = d;
      bx = x0;
    }
  }
  if (bd <= 1e-6) throw Error(Errc::OutOfStrip, "no admissible integration line", z);
  return theta0_line(z, bx, bd / 6.0, nullptr);
}

double SigmaEngine::lattice_distance(cplx z, cplx* nearest) const {
  double best = 1e300;
  cplx bp{NAN, NAN};
  auto scan = [&](double x, double sgn) {
    for (int j = 0; PI + h_ + 2 * PI * j <= x + 2 * h_; ++j) {
      double t = (x - PI - h_ - 2 * PI * j) / (2 * h_);
      for (double kk : {std::floor(t), std::ceil(t)}) {
        if (kk < 0) kk = 0;
        cplx p = sgn * zero_point(h_, j, (int)kk);
        double d = std::abs(z - p);
        if (d < best) {
          best = d;
          bp = p;
        }
      }
    }
  };
  scan(z.real(), 1.0);
  scan(-z.real(), -1.0);
  if (nearest) *nearest = bp;
  return best;
}

cplx SigmaEngine::log_sigma(cplx z) const {
  if (std::abs(z.real()) > opt_.max_re_over_h * h_)
    throw Error(Errc::OutOfStrip, "sigma evaluation too far from the base strip", z);
  cplx lp;
  if (lattice_distance(z, &lp) < 1e-14 * (1.0 + std::abs(z)))
    throw Error(Errc::NearSingular, "sigma evaluated on its zero/pole lattice", lp);
  long k = std::lround(z.real() / (2 * h_));
  cplx acc = 0.0;
  if (k > 0)
    for (long j = 0; j < k; ++j) acc += log1pexp_minus(z - h_ - 2.0 * h_ * (double)j);
  else
    for (long j = 0; j < -k; ++j) acc -= log1pexp_minus(z + h_ + 2.0 * h_ * (double)j);
  return acc + theta0(z - 2.0 * h_ * (double)k);
}

SigmaValue SigmaEngine::eval(cplx z) const {
  SigmaValue r;
  cplx lp;
  double d = lattice_distance(z, &lp);
  if (d < opt_.pole_guard) {
    r.near_singular = true;
    r.lattice_point = lp;
  }
  if (d < 1e-14 * (1.0 + std::abs(z))) {
    bool zero = lp.real() > 0;
    r.value = zero ? cplx(0.0) : cplx(INFINITY, 0.0);
    r.log = zero ? cplx(-INFINITY, 0.0) : cplx(INFINITY, 0.0);
    return r;
  }
  r.log = log_sigma(z);
  r.value = std::exp(r.log);
  return r;
}

cplx SigmaEngine::pole_residue(int j, int k) const {
  cplx P = pole_point(h_, j, k);
  if (k == 0) return -I * eval(P + 2.0 * h_).value;
  return pole_residue(j, k - 1) / (1.0 + std::exp(-I * (P + h_)));
}

cplx SigmaEngine::zero_derivative(int j, int k) const {
  cplx Z = zero_point(h_, j, k);
  if (k == 0) return I * eval(Z - 2.0 * h_).value;
  return (1.0 + std::exp(-I * (Z - h_))) * zero_derivative(j, k - 1);
}

cplx SigmaEngine::residue_closed_form() const {
  return std::sqrt(h_ / PI) * std::exp(-I * (PI * PI / (12 * h_) + PI / 4 + h_ / 12));
}

cplx SigmaEngine::value_at_minus_pi() const {
  return std::exp(-I * (PI * PI / (12 * h_)) + I * h_ / 24.0) / std::sqrt(2.0);
}

}  // namespace monodromize
