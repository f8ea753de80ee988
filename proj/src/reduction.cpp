#include "monodromize/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <unordered_map>

#include "monodromize/model.hpp"

namespace monodromize {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::A: return "A";
    case Kind::B: return "B";
    case Kind::C: return "C";
    case Kind::D: return "D";
  }
  return "?";
}

// ---------------------------------------------------------------- t

TFunction::TFunction(const TrigPoly& b, double h, std::vector<cplx> zeros) : h_(h), zl_(std::move(zeros)) {
  auto ix = tp_indices(b);
  n_plus_ = ix.n_plus;
  n_minus_ = ix.n_minus;
  if (int(zl_.size()) != n_plus_ + n_minus_)
    throw Error(Errc::Inconsistent, "zero count differs from n+(b) + n-(b)");
  SigmaOptions so;
  so.cache_height = 80.0;
  sigma_ = std::make_shared<SigmaEngine>(h, so);
  cplx s = 0.0;
  for (cplx z : zl_) s += z;
  const double N = double(zl_.size());
  t_inf_ = std::exp(0.5 * I * s - I * PI * N / 2.0 + I * h * N / 4.0);
}

cplx TFunction::operator()(cplx z) const {
  cplx lg = I * double(n_minus_) * z / 2.0;
  int zeros = 0, poles = 0;
  for (cplx zl : zl_) {
    SigmaValue a = sigma_->eval(z + PI - zl), b = sigma_->eval(z + PI - zl - h_);
    bool a0 = a.value == 0.0, ai = std::isinf(a.value.real());
    bool b0 = b.value == 0.0, bi = std::isinf(b.value.real());
    zeros += int(a0) + int(bi);
    poles += int(ai) + int(b0);
    if (!a0 && !ai) lg += a.log;
    if (!b0 && !bi) lg -= b.log;
  }
  if (zeros > poles) return 0.0;
  if (poles > zeros) return cplx(INFINITY, 0.0);
  if (zeros > 0) throw Error(Errc::NearSingular, "t evaluated where a zero meets a pole", z);
  return std::exp(lg);
}

cplx TFunction::derivative(cplx z, double r) const {
  const int P = 32;
  cplx s = 0.0;
  for (int k = 0; k < P; ++k) {
    cplx e = std::polar(1.0, 2 * PI * (k + 0.5) / P);
    s += (*this)(z + r * e) / (r * e);
  }
  return s / double(P);
}

namespace {

std::vector<cplx> distinct_roots(const TrigPoly& b) {
  auto roots = tp_roots(b);
  for (size_t i = 0; i < roots.size(); ++i)
    for (size_t j = i + 1; j < roots.size(); ++j) {
      cplx d = roots[i] - roots[j];
      d -= 2 * PI * std::round(d.real() / (2 * PI));
      if (std::abs(d) < 1e-6) throw Error(Errc::Unsupported, "multiple zero of b", roots[i]);
    }
  return roots;
}

}  // namespace

TFunction t_build(const MatrixTrigPoly& M, double h, const std::function<double(cplx)>& offset) {
  std::vector<cplx> zl;
  for (cplx r : distinct_roots(M.b)) {
    double o = offset(r);
    cplx z = r - 2 * PI * std::floor(o / (2 * PI));
    double oz = offset(z);
    double oh = std::fmod(oz + h, 2 * PI);
    if (oz < 1e-8 || 2 * PI - oz < 1e-8 || oh < 1e-8 || 2 * PI - oh < 1e-8)
      throw Error(Errc::RootOnContour, "zero of b(z) or b(z-h) on the curve", z);
    zl.push_back(z);
  }
  return TFunction(M.b, h, std::move(zl));
}

// ---------------------------------------------------------------- reduce

ReducedProblem reduce(const MatrixTrigPoly& M, double h, const ReduceOptions& opt) {
  if (!(h > 0 && h < 2 * PI)) throw Error(Errc::BadStep, "h must lie in (0, 2 pi)");
  ReducedProblem R;
  R.M = M;
  R.h = h;
  RhoV rv = rho_v(M, h);
  auto in = tp_indices(rv.v.num), id = tp_indices(rv.v.den);
  int np = in.n_plus - id.n_plus, nm = in.n_minus - id.n_minus;
  if (np != nm || np <= 0) throw Error(Errc::Unsupported, "v must satisfy n+(v) = n-(v) > 0");
  R.n = np;
  auto ib = tp_indices(M.b);
  R.nb_plus = ib.n_plus;
  R.nb_minus = ib.n_minus;

  if (opt.phi_plus.has_value() != opt.phi_minus.has_value())
    throw Error(Errc::Inconsistent, "phi+ and phi- must be given together");
  if (opt.phi_plus) {
    auto v = consistency_check(*opt.phi_plus, *opt.phi_minus, h, opt.margin);
    if (!v.consistent) throw Error(Errc::Inconsistent, "phi+ - phi- too close to the excluded set", *opt.phi_plus);
    R.phi_plus = *opt.phi_plus;
    R.phi_minus = *opt.phi_minus;
    R.consistency_distance = v.distance;
  } else {
    cplx pp = BlochBasis::principal_phi(M, h, Side::Plus), pm = BlochBasis::principal_phi(M, h, Side::Minus);
    bool found = false;
    for (int k : {0, 1, -1, 2, -2}) {
      auto v = consistency_check(pp + 2 * PI * k, pm, h, opt.margin);
      if (v.consistent) {
        R.phi_plus = v.phi_plus;
        R.phi_minus = pm;
        R.consistency_distance = v.distance;
        found = true;
        break;
      }
    }
    if (!found) throw Error(Errc::Inconsistent, "no branch of phi+ within two periods clears the excluded set", pp - pm);
  }
  R.phi = 0.5 * (R.phi_plus + R.phi_minus);
  R.xi = (R.phi_plus - R.phi_minus) / (2.0 * I);
  R.h1 = R.n * h;
  return R;
}

std::optional<TrigPoly> ReducedProblem::w_exact() const {
  if (M.b.min_index() != M.b.max_index()) return std::nullopt;
  const double nm = M.b.max_index();
  std::map<int, cplx> c;
  double scale = 0.0;
  auto add = [&](int l, cplx v) {
    c[l] += v;
    scale = std::max(scale, std::abs(v));
  };
  for (auto& [l, v] : M.a.coeffs()) add(l, v * std::exp(-I * nm * h / 2.0));
  for (auto& [l, v] : tp_shift(M.d, -h).coeffs()) add(l, v * std::exp(I * nm * h / 2.0));
  add(n, std::exp(I * (phi_minus + PI)));
  add(-n, std::exp(-I * (phi_plus + PI)));
  for (auto it = c.begin(); it != c.end();)
    it = std::abs(it->second) <= 1e-13 * scale ? c.erase(it) : std::next(it);
  return TrigPoly(std::move(c));
}

Sampler ReducedProblem::w(const TFunction& t) const {
  if (auto we = w_exact()) {
    TrigPoly p = *we;
    return [p](cplx z) { return p(z); };
  }
  auto tp = std::make_shared<TFunction>(t);
  TrigPoly a = M.a, ds = tp_shift(M.d, -h);
  const double hh = h;
  const int nn = n;
  const cplx em = std::exp(I * (phi_minus + PI)), ep = std::exp(-I * (phi_plus + PI));
  return [tp, a, ds, hh, nn, em, ep](cplx z) {
    cplx t0 = (*tp)(z), t1 = (*tp)(z + hh), tm = (*tp)(z - hh);
    cplx v1 = a(z) * (t0 / t1) + ds(z) * (t0 / tm);
    return v1 + em * std::exp(I * double(nn) * z) + ep * std::exp(-I * double(nn) * z);
  };
}

MatrixTrigPoly conj_matrix(const MatrixTrigPoly& M) {
  auto cj = [](const TrigPoly& f) {
    std::map<int, cplx> c;
    for (auto& [l, v] : f.coeffs()) c[-l] = std::conj(v);
    return TrigPoly(std::move(c));
  };
  return MatrixTrigPoly(cj(M.a), cj(M.b), cj(M.c), cj(M.d));
}

// ---------------------------------------------------------------- slots

cplx SlotCoeffs::slot(Kind k) const {
  switch (k) {
    case Kind::A: return A;
    case Kind::B: return B;
    case Kind::C: return C;
    case Kind::D: return D;
  }
  return 0.0;
}

SlotCoeffs SlotCoeffs::scaled(cplx c) const {
  SlotCoeffs r = *this;
  r.A *= c;
  r.B *= c;
  r.C *= c;
  r.D *= c;
  r.vanishing *= c;
  return r;
}

MinimalSolution::MinimalSolution(Kind kind, MatrixTrigPoly M, double h, cplx phi_plus, cplx phi_minus,
                                 SlotCoeffs coeffs, VectorSampler sampler, BaseLocator base, AssemblyInfo info)
    : kind_(kind),
      M_(std::move(M)),
      h_(h),
      phi_plus_(phi_plus),
      phi_minus_(phi_minus),
      coeffs_(coeffs),
      sampler_(std::move(sampler)),
      base_(std::move(base)),
      info_(info) {}

MinimalSolution MinimalSolution::scaled(cplx c) const {
  MinimalSolution r = *this;
  r.coeffs_ = coeffs_.scaled(c);
  VectorSampler s = sampler_;
  r.sampler_ = [s, c](cplx z, double shift) -> Eigen::Vector2cd { return c * s(z, shift); };
  return r;
}

// ---------------------------------------------------------------- assembly

namespace {

std::shared_ptr<const ModelPair> shared_model(cplx xi, double h) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>, std::weak_ptr<const ModelPair>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_tuple(xi.real(), xi.imag(), h);
  if (auto sp = cache[key].lock()) return sp;
  auto sp = std::make_shared<const ModelPair>(ModelParams{xi, h});
  cache[key] = sp;
  return sp;
}

struct Placement {
  std::vector<Forbidden> forbidden;  // model coordinates
  std::vector<cplx> carried;         // z coordinates, zeros kept inside the left h-vicinity
  double margin = INFINITY;          // z units
};

// Model-coordinate default curve without detours, as laid out by build_contour.
double default_x(double y, double x_up, double x_down, const ContourOptions& co) {
  const double J = std::max(co.join, std::abs(x_up - x_down) / (2 * co.max_slope));
  if (y <= -J) return x_down;
  if (y >= J) return x_up;
  return x_down + (y + J) / (2 * J) * (x_up - x_down);
}

Placement place_zeros(const ReducedProblem& R, const Chart& ch, double x_up, double x_down, const ContourOptions& co,
                      bool carry) {
  Placement p;
  const double h = R.h, n = R.n, sg = ch.alpha > 0 ? 1.0 : -1.0;
  auto side_u = [&](int side_z) { return int(sg) * side_z; };
  for (cplx zb : distinct_roots(R.M.b)) {
    cplx ub = ch.to_model(zb);
    double d0 = sg * (ub.real() - default_x(ub.imag(), x_up, x_down, co)) / n;
    if (!carry) {
      const double delta = std::min(0.25 * (2 * PI - h), 0.5 * h);
      const double target = 0.5 * (2 * PI - h);
      double k = std::round((target - d0) / (2 * PI));
      cplx z1 = zb + 2 * PI * k;
      p.forbidden.push_back({ch.to_model(z1), n * delta, side_u(+1)});
      p.forbidden.push_back({ch.to_model(z1 - 2 * PI), n * (h + delta), side_u(-1)});
    } else {
      // offset of z0 in about (-0.62h, -0.53h): the continuation to z0 + h must not need f(z0)
      const double target = -0.57 * h;
      double k = std::round((target - d0) / (2 * PI));
      cplx z0 = zb + 2 * PI * k;
      p.forbidden.push_back({ch.to_model(z0), n * 0.52 * h, side_u(-1)});
      p.forbidden.push_back({ch.to_model(z0 + h), n * 0.38 * h, side_u(+1)});
      p.carried.push_back(z0);
    }
  }
  return p;
}

struct Assembled {
  MatrixTrigPoly M;
  double h;
  int n;
  Chart chart;
  std::shared_ptr<const TFunction> t;
  FredholmSolution F;
  std::vector<cplx> carried;
  double r0;
  int max_steps;
  mutable std::mutex mu;
  mutable std::unordered_map<std::string, Eigen::Vector2cd> cache;

  double offset_z(cplx z) const {
    double o = F.kernel().contour().offset(chart.to_model(z));
    return (chart.alpha > 0 ? o : -o) / double(n);
  }
  const cplx* near_carried(cplx z) const {
    for (const cplx& z0 : carried)
      if (std::abs(z - z0) < r0) return &z0;
    return nullptr;
  }
  cplx psi1_direct(cplx z) const {
    cplx tv = (*t)(z);
    if (tv == 0.0) return 0.0;
    return tv * F(chart.to_model(z));
  }
  Eigen::Vector2cd base_direct(cplx z) const {
    cplx p0 = psi1_direct(z), p1 = psi1_direct(z + h);
    Eigen::Vector2cd r;
    r << p0, (p1 - M.a(z) * p0) / M.b(z);
    return r;
  }
  Eigen::Vector2cd base(cplx z) const {
    std::string key(2 * sizeof(double), '\0');
    double re = z.real(), im = z.imag();
    std::memcpy(key.data(), &re, sizeof re);
    std::memcpy(key.data() + sizeof re, &im, sizeof im);
    {
      std::lock_guard<std::mutex> lk(mu);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
    }
    Eigen::Vector2cd v;
    if (near_carried(z)) {
      // removable point of t f0 and of the quotient by b: mean over a circle
      const int P = 16;
      v.setZero();
      for (int q = 0; q < P; ++q) v += base_direct(z + std::polar(2.0 * r0, 2 * PI * (q + 0.5) / P));
      v /= double(P);
    } else {
      v = base_direct(z);
    }
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(key, v);
    return v;
  }
  long steps(cplx z, double shift) const {
    long k = long(std::floor((offset_z(z) - shift) / h)) + 1;
    if (std::abs(k) > max_steps) throw Error(Errc::OutOfVicinity, "more continuation steps than allowed", z);
    return k;
  }
  cplx base_point(cplx z, double shift) const { return z - double(steps(z, shift)) * h; }
  Eigen::Vector2cd eval(cplx z, double shift) const {
    long k = steps(z, shift);
    cplx zb = z - double(k) * h;
    Eigen::Vector2cd v = base(zb);
    for (long j = 0; j < k; ++j) v = M(zb + double(j) * h) * v;
    for (long j = 1; j <= -k; ++j) {
      Eigen::Matrix2cd A = M(zb - double(j) * h);
      Eigen::Matrix2cd Ai;
      Ai << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
      v = Ai * v / A.determinant();
    }
    return v;
  }
};

MinimalSolution assemble_chart(const ReducedProblem& R, Kind kind, const AssemblyOptions& opt) {
  const bool mirror = kind == Kind::B;
  const Chart ch = mirror ? R.chart_mirror() : R.chart_direct();
  const double h = R.h, h1 = R.h1;
  const int n = R.n;
  auto model = shared_model(R.xi, h1);
  const double x_up = PI + R.xi.imag(), x_down = -R.xi.imag();

  ContourOptions co;
  co.h = h1;
  co.density = opt.density;

  // mu from w with a provisional t; poles of w only move by periods
  bool has_zeros = R.M.b.min_index() != R.M.b.max_index();
  auto w_of = [&](const TFunction& t) {
    Sampler wz = R.w(t);
    return Sampler([wz, ch](cplx u) { return wz(ch.from_model(u)); });
  };

  auto try_build = [&](bool carry, Placement& pl, Contour& gm, double& mu) {
    pl = place_zeros(R, ch, x_up, x_down, co, carry);
    Contour probe = build_contour(x_up, x_down, pl.forbidden, co);
    auto offz = [&](const Contour& c) {
      return [&c, ch, n](cplx z) {
        double o = c.offset(ch.to_model(z));
        return (ch.alpha > 0 ? o : -o) / double(n);
      };
    };
    TFunction t0 = t_build(R.M, h, offz(probe));
    mu = estimate_mu(w_of(t0), 0.5 * (x_up + x_down), h1);
    co.T = truncation_height(mu, opt.tail_tol);
    gm = build_contour(x_up, x_down, pl.forbidden, co);
  };

  Placement pl;
  Contour gm;
  double mu = 1.0;
  bool carry = opt.policy == ZeroPolicy::Carry && has_zeros;
  if (carry && mirror) throw Error(Errc::KindUnavailable, "the reflected route cannot carry zeros of b");
  try {
    try_build(carry, pl, gm, mu);
  } catch (const Error& e) {
    if (e.code() != Errc::Infeasible || carry || !opt.carry_fallback) throw;
    if (mirror) throw Error(Errc::KindUnavailable, "no curve keeps the zeros of b out of the left h-vicinity");
    carry = true;
    try_build(true, pl, gm, mu);
  }

  auto offz = [&gm, ch, n](cplx z) {
    double o = gm.offset(ch.to_model(z));
    return (ch.alpha > 0 ? o : -o) / double(n);
  };
  auto t = std::make_shared<const TFunction>(t_build(R.M, h, offz));
  auto K = std::make_shared<const KernelOp>(model, w_of(*t), gm, mu);

  std::vector<ExtZero> ext;
  for (cplx z0 : pl.carried) {
    double r = 0.05 * std::min(h, 1.0);
    cplx tp = t->derivative(z0, r);
    cplx s = (PI / h) * (*t)(z0 + h) / (tp * R.M.a(z0));
    ext.push_back({ch.to_model(z0), s});
  }
  FredholmSolution F = ext.empty() ? solve(K, Rhs::Model, opt.solve) : solve_extended(K, ext, Rhs::Model, opt.solve);

  auto st = std::make_shared<Assembled>();
  st->M = R.M;
  st->h = h;
  st->n = n;
  st->chart = ch;
  st->t = t;
  st->F = F;
  st->carried = pl.carried;
  st->r0 = 0.05 * std::min(h, 1.0);
  st->max_steps = opt.max_steps;

  AssemblyInfo info;
  info.nodes = gm.size();
  info.T = gm.T;
  info.mu = mu;
  info.fredholm_residual = F.residual();
  info.sigma_min = F.sigma_min();
  info.delta = F.delta();
  info.carried = int(pl.carried.size());
  info.margin = 0.5 * h;
  if (!carry) {
    for (cplx zb : distinct_roots(R.M.b)) {
      double o = offz(zb);
      o -= 2 * PI * std::floor(o / (2 * PI));
      info.margin = std::min({info.margin, o, 2 * PI - h - o});
    }
  } else {
    info.margin = std::min(info.margin, 0.3 * h);
  }

  // semi-analytic slots from the two-exponential asymptotics
  AsympCoeffs ac = F.asymptotics();
  const cplx tinf = t->t_inf(), be = ch.beta;
  const double nh = n * h;
  SlotCoeffs sc;
  sc.kind = kind;
  if (!mirror) {
    sc.A = tinf * std::exp(I * be / 2.0) * ac.a;
    sc.B = tinf * std::exp(I * be / 2.0) * ac.b;
    sc.C = std::exp(-I * be / 2.0) * ac.c;
    sc.D = std::exp(-I * be / 2.0) * std::exp(-2.0 * PI * I * be / nh) * ac.d;
  } else {
    sc.A = tinf * std::exp(-I * be / 2.0) * ac.c;
    sc.B = tinf * std::exp(-I * be / 2.0) * std::exp(-2.0 * PI * I * be / nh) * ac.d;
    sc.C = std::exp(I * be / 2.0) * ac.a;
    sc.D = std::exp(I * be / 2.0) * ac.b;
  }

  VectorSampler smp = [st](cplx z, double shift) { return st->eval(z, shift); };
  BaseLocator loc = [st](cplx z, double shift) { return st->base_point(z, shift); };
  return MinimalSolution(kind, R.M, h, R.phi_plus, R.phi_minus, sc, std::move(smp), std::move(loc), info);
}

}  // namespace

MinimalSolution assemble_minimal(const ReducedProblem& R, Kind kind, const AssemblyOptions& opt) {
  if (kind == Kind::D || kind == Kind::B) return assemble_chart(R, kind, opt);
  // A and C: the conjugate problem conj(M(conj z)) with swapped, conjugated parameters
  ReduceOptions ro;
  ro.phi_plus = std::conj(R.phi_minus);
  ro.phi_minus = std::conj(R.phi_plus);
  ro.margin = 0.0;
  ReducedProblem Rs = reduce(conj_matrix(R.M), R.h, ro);
  MinimalSolution inner = assemble_chart(Rs, kind == Kind::A ? Kind::D : Kind::B, opt);
  const SlotCoeffs& ic = inner.coeffs();
  SlotCoeffs sc;
  sc.kind = kind;
  sc.A = std::conj(ic.D);
  sc.B = std::conj(ic.C);
  sc.C = std::conj(ic.B);
  sc.D = std::conj(ic.A);
  sc.vanishing = std::conj(ic.vanishing);
  VectorSampler is = inner.sampler();
  VectorSampler smp = [is](cplx z, double shift) -> Eigen::Vector2cd { return is(std::conj(z), shift).conjugate(); };
  BaseLocator il = inner.base_locator();
  BaseLocator loc = [il](cplx z, double shift) { return std::conj(il(std::conj(z), shift)); };
  return MinimalSolution(kind, R.M, R.h, R.phi_plus, R.phi_minus, sc, std::move(smp), std::move(loc), inner.info());
}

// ---------------------------------------------------------------- slots by wronskians

CanonicalBases canonical_bases(const MatrixTrigPoly& M, double h, cplx phi_plus, cplx phi_minus) {
  CanonicalBases b;
  b.f = std::make_shared<const BlochBasis>(M, h, Side::Plus, phi_plus);
  b.g = std::make_shared<const BlochBasis>(M, h, Side::Minus, phi_minus);
  return b;
}

namespace {

cplx det2(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) { return a(0) * b(1) - a(1) * b(0); }

// mean over one period of q(z) e^{-2 pi i l s z/h} along Im z = y, centred at x
template <class F>
cplx fourier(F q, double x, double y, double h, int samples, int l) {
  cplx s = 0.0;
  for (int j = 0; j < samples; ++j) {
    cplx z(x + h * ((j + 0.5) / samples - 0.5), y);
    s += q(z) * std::exp(-2.0 * PI * I * double(l) * z / h);
  }
  return s / double(samples);
}

}  // namespace

SlotCoeffs min_asymp_coeffs(const MinimalSolution& sol, const CanonicalBases& bases, const SlotOptions& opt) {
  const BlochBasis& f = *bases.f;
  const BlochBasis& g = *bases.g;
  if (std::abs(f.phi() - sol.phi_plus()) > 1e-12 * (1 + std::abs(f.phi())) ||
      std::abs(g.phi() - sol.phi_minus()) > 1e-12 * (1 + std::abs(g.phi())))
    throw Error(Errc::BasisMismatch, "bases built with other parameters than the solution");
  const double h = sol.h();
  const int n = f.n_v();
  const int S = opt.samples;
  const double Y = opt.height;
  const double pp = sol.phi_plus().real(), pm = sol.phi_minus().real();

  // above: psi = A f1 + B f2, A = {psi, f2}/{f1, f2}, B = {f1, psi}/{f1, f2}
  auto Aq = [&](cplx z) {
    auto p = sol(z);
    auto f1 = f(1, z), f2 = f(2, z);
    return det2(p, f2) / det2(f1, f2);
  };
  auto Bq = [&](cplx z) {
    auto p = sol(z);
    auto f1 = f(1, z), f2 = f(2, z);
    return det2(f1, p) / det2(f1, f2);
  };
  auto Cq = [&](cplx z) {
    auto p = sol(z);
    auto g1 = g(1, z), g2 = g(2, z);
    return det2(p, g2) / det2(g1, g2);
  };
  auto Dq = [&](cplx z) {
    auto p = sol(z);
    auto g1 = g(1, z), g2 = g(2, z);
    return det2(g1, p) / det2(g1, g2);
  };

  // first coefficients sit under e^{-2 pi |y|/h}: lower line, still inside the Bloch vicinity
  auto low = [&](const BlochBasis& b) { return std::max(b.Y() + 1.5, std::min(Y, 14.0 / (2 * PI / h + n))); };

  SlotCoeffs r;
  r.kind = sol.kind();
  const double xp = -pp / n, xm = -pm / n;
  // the expansion in e^{2 pi i l z / h} above and e^{-2 pi i l z / h} below
  r.A = fourier(Aq, xp, Y, h, S, 0);
  r.B = fourier(Bq, xp, Y, h, S, 0);
  r.C = fourier(Cq, xm, -Y, h, S, 0);
  r.D = fourier(Dq, xm, -Y, h, S, 0);
  switch (sol.kind()) {
    case Kind::A:
      r.vanishing = r.A;
      r.A = fourier(Aq, (-PI - pp) / n, low(f), h, S, 1);
      break;
    case Kind::B:
      r.vanishing = r.B;
      r.B = fourier(Bq, (PI - pp) / n, low(f), h, S, 1);
      break;
    case Kind::C:
      r.vanishing = r.C;
      r.C = fourier(Cq, (PI - pm) / n, -low(g), h, S, -1);
      break;
    case Kind::D:
      r.vanishing = r.D;
      r.D = fourier(Dq, (-PI - pm) / n, -low(g), h, S, -1);
      break;
  }
  return r;
}

}  // namespace monodromize
