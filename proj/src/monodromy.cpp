#include "monodromize/monodromy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace monodromize {

cplx wronskian(const PointSampler& psi, const PointSampler& chi, cplx z) {
  Eigen::Vector2cd p = psi(z), q = chi(z);
  return p(0) * q(1) - p(1) * q(0);
}

cplx wronskian(const MinimalSolution& psi, const MinimalSolution& chi, cplx z) {
  Eigen::Vector2cd p = psi(z), q = chi(z);
  return p(0) * q(1) - p(1) * q(0);
}

unsigned max_threads() {
  if (const char* s = std::getenv("MONODROMIZE_THREADS")) {
    long v = std::strtol(s, nullptr, 10);
    if (v >= 1) return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class F>
void parallel_for(int count, F&& f) {
  const unsigned T = std::min<unsigned>(max_threads(), unsigned(std::max(count, 1)));
  if (T <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < T; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

cplx det2(const Eigen::Vector2cd& p, const Eigen::Vector2cd& q) { return p(0) * q(1) - p(1) * q(0); }

// columns X(z), Y(z), X(z+2pi), Y(z+2pi)
struct Values {
  Eigen::Vector2cd x, y, x2, y2;
};

Values sample(const MinimalSolution& X, const MinimalSolution& Y, cplx z, double shift) {
  return {X.eval(z, shift), Y.eval(z, shift), X.eval(z + 2 * PI, shift), Y.eval(z + 2 * PI, shift)};
}

Eigen::Matrix2cd entries_at(const Values& v, cplx w) {
  Eigen::Matrix2cd m;
  m << det2(v.x2, v.y), det2(v.x, v.x2), det2(v.y2, v.y), det2(v.x, v.y2);
  return m / w;
}

bool in_tau(const TrigPoly& f, int m, int l) {
  if (f.is_zero()) return true;
  auto ix = tp_indices(f);
  return ix.n_minus <= l && ix.n_plus <= m;
}

}  // namespace

cplx MonodromyResult::harmonic(int entry, int l) const {
  const int N = int(harmonics[entry].size());
  if (l < -N / 2 || l >= N / 2) return 0.0;
  return harmonics[entry][size_t(l + N / 2)];
}

double MonodromyResult::tail(int order) const {
  double t = 0.0;
  for (int e = 0; e < 4; ++e) {
    const int N = int(harmonics[e].size());
    for (int l = -N / 2; l < N / 2; ++l)
      if (std::abs(l) > order) t = std::max(t, std::abs(harmonic(e, l)));
  }
  return scale > 0 ? t / scale : t;
}

Eigen::Matrix2cd MonodromyResult::operator()(cplx zz) const {
  const cplx z1 = 2 * PI * zz / h;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  for (int e = 0; e < 4; ++e) {
    const int N = int(harmonics[e].size());
    cplx s = 0.0;
    for (int l = -N / 2; l < N / 2; ++l) s += harmonic(e, l) * std::exp(I * double(l) * z1);
    m(e / 2, e % 2) = s;
  }
  return m;
}

MonodromyResult natural_pair_monodromy(const MinimalSolution& X, const MinimalSolution& Y,
                                       const MonodromyOptions& opt) {
  const double h = X.h();
  if (std::abs(Y.h() - h) > 1e-14 * h) throw Error(Errc::BasisMismatch, "solutions with different steps");
  const int N = opt.samples;
  if (N < 8 || N % 2) throw Error(Errc::Unsupported, "samples per period must be even and at least 8");

  MonodromyResult r;
  r.h = h;
  r.first = X.kind();
  r.second = Y.kind();
  r.n = std::max(tp_indices(X.matrix().a).n_plus, tp_indices(X.matrix().a).n_minus);

  const int C = std::max(opt.checks, 1);
  std::vector<cplx> pts;
  for (int k = 0; k < N; ++k) pts.emplace_back(h * k / N, opt.y);
  // off-grid checks, and their translates by h continued from base strips shifted the other way
  for (int k = 0; k < C; ++k) pts.emplace_back(h * (k + 0.37) / C, opt.y);
  for (int k = 0; k < C; ++k) pts.emplace_back(h * (k + 0.37) / C + h, opt.y);
  const double sh = std::min(X.max_shift(), Y.max_shift());
  auto shift_of = [&](size_t i) { return i < size_t(N) ? 0.0 : i < size_t(N + C) ? -sh : sh; };
  std::vector<Values> vals(pts.size());
  parallel_for(int(pts.size()), [&](int i) { vals[size_t(i)] = sample(X, Y, pts[size_t(i)], shift_of(size_t(i))); });
  for (int k = 0; k < C; ++k) {
    cplx a = pts[size_t(N + k)], b = pts[size_t(N + C + k)];
    for (cplx z2 : {0.0, 2 * PI})
      if (std::abs(X.base_point(b + z2, sh) - X.base_point(a + z2, -sh)) > 1e-9 * h ||
          std::abs(Y.base_point(b + z2, sh) - Y.base_point(a + z2, -sh)) > 1e-9 * h) {
        ++r.periodicity_independent;
        break;
      }
  }

  // w from the samples on the line; its spread measures the constancy
  std::vector<cplx> ws;
  for (const Values& v : vals) ws.push_back(det2(v.x, v.y));
  cplx w = 0.0;
  for (cplx v : ws) w += v;
  w /= double(ws.size());
  double typ = 0.0;
  for (const Values& v : vals) typ = std::max(typ, v.x.norm() * v.y.norm());
  if (!(std::abs(w) > opt.pair_tol * typ))
    throw Error(Errc::DegeneratePair, "the wronskian of the pair vanishes");
  for (cplx v : ws) r.w_spread = std::max(r.w_spread, std::abs(v - w) / std::abs(w));
  r.w = w;

  for (int k = 0; k < N; ++k) {
    r.z.push_back(pts[size_t(k)]);
    r.raw.push_back(entries_at(vals[size_t(k)], w));
  }
  // samples at z_k = h k/N: f(z_k) = sum_l c_l e^{i l z1_k} e^{-l y1}, z1 = 2 pi z/h
  const double y1 = 2 * PI * opt.y / h;
  for (int e = 0; e < 4; ++e) {
    r.harmonics[e].assign(size_t(N), 0.0);
    for (int l = -N / 2; l < N / 2; ++l) {
      cplx s = 0.0;
      for (int k = 0; k < N; ++k) s += r.raw[size_t(k)](e / 2, e % 2) * std::exp(-2.0 * PI * I * double(l * k) / double(N));
      r.harmonics[e][size_t(l + N / 2)] = s / double(N) * std::exp(double(l) * y1);
    }
  }
  for (int e = 0; e < 4; ++e)
    for (cplx c : r.harmonics[e]) r.scale = std::max(r.scale, std::abs(c));
  for (int e = 0; e < 4; ++e) {
    std::map<int, cplx> m;
    for (int l = -N / 2; l < N / 2; ++l)
      if (std::abs(r.harmonic(e, l)) > opt.harmonic_tol * r.scale) m[l] = r.harmonic(e, l);
    r.entries[e] = TrigPoly(std::move(m));
  }

  for (int k = 0; k < C; ++k) {
    Eigen::Matrix2cd a = entries_at(vals[size_t(N + k)], w), b = entries_at(vals[size_t(N + C + k)], w);
    r.fit_residual = std::max(r.fit_residual, (r(pts[size_t(N + k)]) - a).cwiseAbs().maxCoeff() / r.scale);
    r.periodicity_residual = std::max(r.periodicity_residual, (a - b).cwiseAbs().maxCoeff() / r.scale);
  }
  for (const auto& m : r.raw) r.det_residual = std::max(r.det_residual, std::abs(m.determinant() - 1.0));
  TrigPoly det = r.entries[0] * r.entries[3] - r.entries[1] * r.entries[2];
  for (auto& [l, c] : det.coeffs()) r.det_poly_residual = std::max(r.det_poly_residual, std::abs(l == 0 ? c - 1.0 : c));
  if (det.is_zero()) r.det_poly_residual = 1.0;
  return r;
}

MonodromyResult monodromy_matrix(const MinimalSolution& d, const MinimalSolution& b, const MonodromyOptions& opt) {
  if (d.kind() != Kind::D || b.kind() != Kind::B) throw Error(Errc::BasisMismatch, "expected the pair (psi_D, psi_B)");
  if (std::abs(d.phi_plus() - b.phi_plus()) > 1e-12 || std::abs(d.phi_minus() - b.phi_minus()) > 1e-12)
    throw Error(Errc::BasisMismatch, "psi_D and psi_B use different canonical bases");
  return natural_pair_monodromy(d, b, opt);
}

StructureReport entry_orders(const MonodromyResult& r, int n) {
  StructureReport s;
  const auto& E = r.entries;
  bool m11 = !E[0].is_zero() && tp_indices(E[0]).n_plus == n && tp_indices(E[0]).n_minus == n;
  s.omega_member = m11 && in_tau(E[0], n, n) && in_tau(E[1], n, n - 1) && in_tau(E[2], n - 1, n) &&
                   in_tau(E[3], n - 1, n - 1);
  s.orders_bounded = true;
  for (const TrigPoly& f : E) s.orders_bounded = s.orders_bounded && in_tau(f, n, n);
  s.tail = r.tail(n);
  return s;
}

StructureReport structure_check(const MonodromyResult& r, int n, cplx alpha2, cplx beta1, const SlotCoeffs& cd,
                                const SlotCoeffs& cb, double skip_tol) {
  StructureReport s = entry_orders(r, n);
  const cplx e4 = std::exp(4.0 * PI * PI * I / r.h);
  // denominators are compared with the largest coefficient of their own solution
  auto big = [](const SlotCoeffs& c) { return std::max({std::abs(c.A), std::abs(c.B), std::abs(c.C), std::abs(c.D)}); };
  const double sd = big(cd), sb = big(cb);
  auto okd = [&](cplx v) { return std::abs(v) >= skip_tol * sd; };
  auto okb = [&](cplx v) { return std::abs(v) >= skip_tol * sb; };
  auto add = [&](const char* name, int entry, int l, cplx pred, bool valid) {
    Comparison c;
    c.name = name;
    c.entry = entry;
    c.harmonic = l;
    c.fitted = r.harmonic(entry, l);
    c.predicted = pred;
    c.skipped = !valid;
    if (valid) {
      c.rel_error = std::abs(c.fitted - pred) / std::abs(pred);
      s.worst = std::max(s.worst, c.rel_error);
    }
    s.comparisons.push_back(c);
  };
  add("M11 at +i inf", 0, -n, alpha2, true);
  add("M11 at -i inf", 0, n, beta1, true);
  bool v = okb(cb.A);
  add("M12 at +i inf", 1, -n, v ? -alpha2 * cd.A / cb.A : 0.0, v);
  v = okb(cb.D);
  add("M12 at -i inf", 1, n - 1, v ? -beta1 * cd.D / cb.D : 0.0, v);
  v = okd(cd.B);
  add("M21 at +i inf", 2, -(n - 1), v ? alpha2 * e4 * cb.B / cd.B : 0.0, v);
  v = okd(cd.C);
  add("M21 at -i inf", 2, n, v ? beta1 * cb.C / cd.C : 0.0, v);
  v = okd(cd.B) && okb(cb.A);
  add("M22 at +i inf", 3, -(n - 1), v ? -alpha2 * e4 * cd.A * cb.B / (cd.B * cb.A) : 0.0, v);
  v = okb(cb.D) && okd(cd.C);
  add("M22 at -i inf", 3, n - 1, v ? -beta1 * cd.D * cb.C / (cb.D * cd.C) : 0.0, v);
  return s;
}

void canonical_factorization(const MinimalSolution&, const MinimalSolution&) {
  throw Error(Errc::Unsupported, "canonical factorization needs minimal solutions for shifted parameters");
}

}  // namespace monodromize
