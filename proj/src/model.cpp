#include "monodromize/model.hpp"

#include <algorithm>
#include <cmath>

#include "monodromize/quadrature.hpp"

namespace monodromize {

namespace {

const cplx U_DIR = std::exp(I * (0.75 * PI));  // direction of travel along the lines
constexpr double OFFSET_MAX = 200.0;
constexpr double CLUSTER_GAP = 0.05;
constexpr int CIRCLE_NODES = 128;

std::shared_ptr<const SigmaEngine> model_sigma(double h) {
  SigmaOptions o;
  o.cache_height = 120.0;
  o.max_re_over_h = 1e6;
  return std::make_shared<SigmaEngine>(h, o);
}

void check_params(const ModelParams& P) {
  if (!(P.h > 0.0)) throw Error(Errc::BadStep, "model step must be positive");
  if (!(P.xi.imag() > -PI - P.h / 2))
    throw Error(Errc::PoleTooClose, "Im xi <= -pi - h/2: pole chains of v are not separated",
                cplx(PI + P.h / 2 + P.xi.imag(), -P.xi.real()));
}

}  // namespace

ModelContour model_contour(const ModelParams& P) {
  check_params(P);
  double r = std::abs(P.xi.real());
  double far = 60.0;
  ModelContour C;
  C.knots = {cplx(0, -r) - far * U_DIR, cplx(0, -r), cplx(0, r), cplx(0, r) + far * U_DIR};
  // the chains sit at heights -Re xi (right) and +Re xi (left) where the contour is at x = 0
  cplx qr = -P.p0() + PI + P.h;
  C.min_pole_distance = qr.real();
  C.nearest_pole = qr;
  C.deformation_justified = C.min_pole_distance > P.h;
  return C;
}

ModelSolution::ModelSolution(ModelParams P, std::shared_ptr<const SigmaEngine> sigma, ModelOptions opt)
    : P_(P), sigma_(sigma ? sigma : model_sigma(P.h)), opt_(opt) {
  check_params(P_);
  if (std::abs(sigma_->h() - P_.h) > 1e-15) throw Error(Errc::BadStep, "sigma engine built for another step");
  auto sv = sigma_->eval(2.0 * I * P_.xi - PI);
  if (sv.near_singular || std::abs(sv.value) < opt_.sigma_zero_guard)
    throw Error(Errc::NearSingular, "sigma(2 i xi - pi) vanishes", 2.0 * I * P_.xi - PI);
  q0_ = -P_.p0() + PI + P_.h;
  double h = P_.h;
  for (int j = 0; 2 * PI * j <= OFFSET_MAX; ++j)
    for (int k = 0; 2 * PI * j + 2 * h * k <= OFFSET_MAX; ++k) poles_.push_back({2 * PI * j + 2 * h * k, j, k});
  std::sort(poles_.begin(), poles_.end(), [](const Pole& a, const Pole& b) { return a.offset < b.offset; });
  for (size_t i = 0; i < poles_.size();) {
    size_t e = i;
    while (e + 1 < poles_.size() && poles_[e + 1].offset - poles_[e].offset < CLUSTER_GAP) ++e;
    double lo = poles_[i].offset, hi = poles_[e].offset;
    double gap = 1e300;
    if (i > 0) gap = std::min(gap, lo - poles_[i - 1].offset);
    if (e + 1 < poles_.size()) gap = std::min(gap, poles_[e + 1].offset - hi);
    clusters_.push_back({i, e, (lo + hi) / 2, (hi - lo) / 2 + 0.4 * std::min(gap, 0.25)});
    i = e + 1;
  }
  res_cache_.assign(poles_.size(), 0.0);
  res_known_.assign(poles_.size(), false);
  coeffs_ = coeffs();
  if (opt_.asym_height > 0.0) {
    for (double y = opt_.asym_height; y <= 32.0; y += 4.0) {
      bool ok = true;
      for (cplx z : {cplx(PI + P_.xi.imag() + 0.3, y), cplx(-P_.xi.imag() - 0.3, -y)}) {
        auto a = eval_integral(z), b = eval_asymptotic(z);
        if (std::abs(a[0] - b[0]) > opt_.asym_tol * std::abs(a[0])) ok = false;
      }
      if (ok) {
        asym_height_ = y;
        break;
      }
    }
  }
}

cplx ModelSolution::vker(cplx p) const {
  cplx p0 = P_.p0();
  return std::exp(-I * p0 * p / (2 * P_.h) + sigma_->log_sigma(p - p0) - sigma_->log_sigma(p + p0));
}

cplx ModelSolution::vker_residue(int j, int k) const {
  double h = P_.h;
  cplx p0 = P_.p0();
  cplx Z = SigmaEngine::zero_point(h, j, k);
  cplx q = Z - p0;
  return std::exp(-I * p0 * q / (2 * h)) * sigma_->eval(Z - 2.0 * p0).value / sigma_->zero_derivative(j, k);
}

cplx ModelSolution::residue_at(size_t idx) const {
  if (!res_known_[idx]) {
    res_cache_[idx] = vker_residue(poles_[idx].j, poles_[idx].k);
    res_known_[idx] = true;
  }
  return res_cache_[idx];
}

std::array<cplx, 2> ModelSolution::cluster_residues(size_t ci, cplx c, bool mirrored) const {
  const Cluster& cl = clusters_[ci];
  const cplx ih4 = -I / (4 * P_.h), ih2 = I / (2 * P_.h);
  cplx sum = 0.0, dsum = 0.0;
  if (cl.first == cl.last) {
    cplx q = mirrored ? -(q0_ + poles_[cl.first].offset) : q0_ + poles_[cl.first].offset;
    cplx dq = q - c;
    cplx G = std::exp(ih4 * dq * dq) * residue_at(cl.first);
    return {2.0 * PI * I * G, 2.0 * PI * I * ih2 * dq * G};
  }
  cplx center = q0_ + cl.center;
  if (mirrored) center = -center;
  auto key = std::make_pair(ci, mirrored);
  auto it = circle_cache_.find(key);
  if (it == circle_cache_.end()) {
    std::vector<cplx> v(CIRCLE_NODES);
    for (int n = 0; n < CIRCLE_NODES; ++n) v[n] = vker(center + cl.radius * std::exp(2.0 * PI * I * double(n) / double(CIRCLE_NODES)));
    it = circle_cache_.emplace(key, std::move(v)).first;
  }
  for (int n = 0; n < CIRCLE_NODES; ++n) {
    cplx e = cl.radius * std::exp(2.0 * PI * I * double(n) / double(CIRCLE_NODES));
    cplx dq = center + e - c;
    cplx term = I * e * std::exp(ih4 * dq * dq) * it->second[n];
    sum += term;
    dsum += ih2 * dq * term;
  }
  const double wgt = 2.0 * PI / CIRCLE_NODES;
  // the mirrored chain is crossed in the opposite sense
  const double sg = mirrored ? -1.0 : 1.0;
  return {sg * wgt * sum, sg * wgt * dsum};
}

double ModelSolution::line_clearance(double s, double tlo, double thi) const {
  double best = 1e300;
  double xr = P_.xi.real();
  cplx base = s * cplx(1, 1) / 2.0;
  auto chain = [&](double height, double xcross, double sign) {
    double t = (std::conj(U_DIR) * (cplx(xcross, height) - base)).real();
    if (t < tlo - 1.0 || t > thi + 1.0) return;
    // poles at Re = sign * (Re q0 + o)
    double otarget = sign * xcross - q0_.real();
    auto it = std::lower_bound(poles_.begin(), poles_.end(), otarget - 1.0,
                               [](const Pole& p, double v) { return p.offset < v; });
    for (; it != poles_.end() && it->offset <= otarget + 1.0; ++it)
      best = std::min(best, std::abs(q0_.real() + it->offset - sign * xcross) / std::sqrt(2.0));
    if (otarget + 1.0 > OFFSET_MAX) throw Error(Errc::QuadratureFail, "pole table exhausted", cplx(xcross, height));
  };
  chain(-xr, s + xr, 1.0);
  chain(xr, s - xr, -1.0);
  return best;
}

const std::array<cplx, 16>& ModelSolution::panel_values(Line& ln, long k) const {
  auto it = ln.panels.find(k);
  if (it != ln.panels.end()) return it->second;
  const auto& g = gauss_legendre(16);
  std::array<cplx, 16> vals;
  double L = opt_.panel;
  for (int i = 0; i < 16; ++i) {
    double t = (k + 0.5 * (g.x[i] + 1.0)) * L;
    vals[i] = vker(ln.base + t * U_DIR);
  }
  return ln.panels.emplace(k, vals).first->second;
}

std::array<cplx, 2> ModelSolution::J(cplx c) const {
  double h = P_.h;
  double ds = opt_.line_spacing;
  double s_exact = c.real() + c.imag();
  double T = std::sqrt(4 * h * std::log(1.0 / opt_.tol)) + 2 * std::abs(P_.p0()) + 1.0;
  long n0 = std::lround(s_exact / ds);
  long chosen = LONG_MIN;
  double best_clear = -1.0;
  long best_n = n0;
  int maxk = (int)std::ceil(opt_.max_offset * std::sqrt(2.0) / ds);
  for (int m = 0; m <= 2 * maxk && chosen == LONG_MIN; ++m) {
    long n = n0 + ((m % 2) ? (m + 1) / 2 : -(m / 2));
    double s = n * ds;
    cplx base = s * cplx(1, 1) / 2.0;
    double tc = (std::conj(U_DIR) * (c - base)).real();
    double cl = line_clearance(s, tc - T, tc + T);
    if (cl >= opt_.clearance) chosen = n;
    if (cl > best_clear) {
      best_clear = cl;
      best_n = n;
    }
  }
  if (chosen == LONG_MIN) {
    if (best_clear < 0.2) throw Error(Errc::QuadratureFail, "no integration line clears the poles of v", c);
    chosen = best_n;
  }
  double s = chosen * ds;
  cplx base = s * cplx(1, 1) / 2.0;
  double tc = (std::conj(U_DIR) * (c - base)).real();
  double L = opt_.panel;
  long k0 = (long)std::floor((tc - T) / L), k1 = (long)std::floor((tc + T) / L);
  const auto& g = gauss_legendre(16);
  cplx Jv = 0.0, dJ = 0.0;
  cplx ih4 = -I / (4 * h), ih2 = I / (2 * h);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = lines_.find(chosen);
    if (it == lines_.end()) it = lines_.emplace(chosen, Line{base, {}}).first;
    for (long k = k0; k <= k1; ++k) {
      const auto& vals = panel_values(it->second, k);
      for (int i = 0; i < 16; ++i) {
        double t = (k + 0.5 * (g.x[i] + 1.0)) * L;
        cplx dp = base + t * U_DIR - c;
        cplx term = (0.5 * L * g.w[i]) * std::exp(ih4 * dp * dp) * vals[i];
        Jv += term;
        dJ += ih2 * dp * term;
      }
    }
  }
  Jv *= U_DIR;
  dJ *= U_DIR;
  // poles between the reference contour and the chosen line
  double xr = P_.xi.real();
  std::lock_guard<std::mutex> lock(mu_);
  double lim_plus = s + xr - q0_.real();
  double lim_minus = -q0_.real() - s + xr;
  if (std::max(lim_plus, lim_minus) > OFFSET_MAX)
    throw Error(Errc::QuadratureFail, "pole table exhausted", c);
  for (size_t ci = 0; ci < clusters_.size(); ++ci) {
    double o = clusters_[ci].center;
    if (o >= lim_plus && o >= lim_minus) break;
    for (bool mirrored : {false, true}) {
      if (o >= (mirrored ? lim_minus : lim_plus)) continue;
      auto r = cluster_residues(ci, c, mirrored);
      Jv -= r[0];
      dJ -= r[1];
    }
  }
  return {Jv, dJ};
}

std::array<cplx, 2> ModelSolution::eval(cplx z) const {
  if (asym_height_ > 0.0 && std::abs(z.imag()) >= asym_height_) return eval_asymptotic(z);
  return eval_integral(z);
}

std::array<cplx, 2> ModelSolution::eval_asymptotic(cplx z) const {
  double h = P_.h;
  cplx xi = P_.xi;
  const ModelCoeffs& C = coeffs_;
  if (z.imag() >= 0) {
    cplx w = z - PI + I * xi;
    cplx e1 = C.a0 * std::exp(I / (2 * h) * w * w + I * z / 2.0);
    cplx e2 = C.b0 * std::exp(-I / (2 * h) * w * w + I * z / 2.0);
    return {e1 + e2, (I / h * w + I / 2.0) * e1 + (-I / h * w + I / 2.0) * e2};
  }
  cplx w = z - PI - I * xi;
  cplx e1 = C.c0 * std::exp(I / (2 * h) * w * w - I * z / 2.0);
  cplx e2 = C.d0 * std::exp(-2.0 * PI * I * z / h - I / (2 * h) * w * w - I * z / 2.0);
  return {e1 + e2, (I / h * w - I / 2.0) * e1 + (-2.0 * PI * I / h - I / h * w - I / 2.0) * e2};
}

std::array<cplx, 2> ModelSolution::eval_integral(cplx z) const {
  double h = P_.h;
  cplx c = PI - 2.0 * z;
  auto [Jv, dJ] = J(c);
  cplx pref = std::exp(I / (2 * h) * (z - PI) * (z - PI) - I * PI * PI / (4 * h));
  cplx m = pref * Jv;
  cplx mp = I / h * (z - PI) * m - 2.0 * pref * dJ;
  return {m, mp};
}

ModelCoeffs ModelSolution::coeffs() const {
  double h = P_.h;
  cplx xi = P_.xi;
  cplx sq = 2.0 * std::sqrt(PI * h);
  cplx s2 = sigma_->eval(2.0 * I * xi - PI).value;
  ModelCoeffs C;
  C.a0 = I * sq * std::exp(-I / (4 * h) * (I * xi - PI) * (I * xi - PI) - xi / 4.0 + I * h / 16.0);
  C.b0 = sq / s2 * std::exp(-I / (4 * h) * (PI - I * xi) * (PI - I * xi) - xi / 4.0 - I * PI * PI / (12 * h) - I * h / 48.0);
  C.c0 = -sq * std::exp(-I / (4 * h) * (PI + I * xi) * (PI + I * xi) - xi / 4.0 + I * h / 16.0);
  C.d0 = sq * I / s2 *
         std::exp(-2 * PI * xi / h - I / (4 * h) * (PI + I * xi) * (PI + I * xi) - xi / 4.0 + 11.0 * I * PI * PI / (12 * h) -
                  I * h / 48.0);
  return C;
}

double ModelSolution::envelope(cplx z) const {
  double x = z.real(), y = z.imag(), phi = P_.xi.imag(), h = P_.h;
  double e = -std::abs(y) / 2;
  if (y >= 0)
    e += std::abs(x - PI - phi) * y / h;
  else
    e += std::abs(x + phi) * std::abs(y) / h - PI * std::abs(y) / h;
  return std::exp(e);
}

ModelPair::ModelPair(ModelParams P, ModelOptions opt) {
  m_ = std::make_shared<ModelSolution>(P, nullptr, opt);
  if (P.xi.imag() == 0.0)
    mc_ = m_;
  else
    mc_ = std::make_shared<ModelSolution>(ModelParams{std::conj(P.xi), P.h}, m_->sigma_ptr(), opt);
}

cplx ModelPair::mt(cplx z) const { return std::conj(mc_->m(std::conj(z))); }

std::array<cplx, 2> ModelPair::mt_eval(cplx z) const {
  auto r = mc_->eval(std::conj(z));
  return {std::conj(r[0]), std::conj(r[1])};
}

cplx ModelPair::wronskian_closed() const { return -4.0 * PI * I * params().h * std::exp(params().xi / 2.0); }

cplx ModelPair::wronskian_sampled(double rel_tol) const {
  double h = params().h;
  std::vector<cplx> w;
  for (int k = 0; k < 10; ++k) {
    cplx z(-1.0 + 0.37 * k, -1.5 + 0.3 * k);
    w.push_back(m(z + h) * mt(z) - m(z) * mt(z + h));
  }
  cplx mean = 0.0;
  for (cplx x : w) mean += x;
  mean /= (double)w.size();
  double spread = 0.0;
  for (cplx x : w) spread = std::max(spread, std::abs(x - mean));
  if (spread > rel_tol * std::abs(mean)) throw Error(Errc::NonConstant, "sampled wronskian is not constant");
  return mean;
}

cplx cot_plus_i(cplx x) {
  if (x.imag() <= 0) return 2.0 * I / (1.0 - std::exp(-2.0 * I * x));
  cplx e = std::exp(2.0 * I * x);
  return -2.0 * I * e / (1.0 - e);
}

cplx ModelPair::pole_eval(cplx z, cplx z0) const {
  double h = params().h;
  if (std::abs(z - z0) < 1e-3 * h) throw Error(Errc::AtPole, "evaluation at the pole of m(z, z0)", z0);
  cplx z1 = z0 + h;
  cplx mt1 = mt(z1), m1 = m(z1);
  auto N = [&](cplx u) { return m(u) * mt1 - m1 * mt(u); };
  cplx eps = z - z1;
  if (std::abs(eps) < 0.02 * h) {
    // z0 + h is removable: theta * N = [eps theta] [N / eps], the quotient by Cauchy's formula
    const int K = 32;
    const double r = 0.05 * h;
    cplx q = 0.0;
    for (int k = 0; k < K; ++k) {
      cplx e = std::polar(1.0, 2 * PI * k / K);
      cplx u = z1 + r * e;
      q += N(u) / (u - z);
    }
    q /= double(K);
    cplx v = PI * eps / h;
    cplx sinc = std::abs(v) < 1e-8 ? cplx(1.0) : v / std::sin(v);
    cplx eps_theta = -(h / PI) * std::cos(v) * sinc + I * eps;
    return eps_theta * q / wronskian_closed();
  }
  return cot_plus_i(PI * (z0 - z) / h) * N(z) / wronskian_closed();
}

}  // namespace monodromize
