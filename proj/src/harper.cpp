#include "monodromize/harper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace monodromize {

MatrixTrigPoly harper_matrix(double lambda, cplx E) {
  return MatrixTrigPoly(TrigPoly::constant(2.0 * E) + TrigPoly::cos_term(1, -2.0 * lambda), TrigPoly::constant(-1.0),
                        TrigPoly::constant(1.0), TrigPoly());
}

const char* chart_name(HChart c) {
  switch (c) {
    case HChart::H0: return "H0";
    case HChart::h0_plus: return "h0+";
    case HChart::h0_minus: return "h0-";
    case HChart::h1_plus: return "h1+";
    case HChart::h1_minus: return "h1-";
  }
  return "?";
}

HarperPoint HarperPoint::surface(double lambda, cplx s, cplx t, double h) {
  HarperPoint p;
  p.lambda = lambda;
  p.s = s;
  p.t = t;
  p.h = h;
  p.chart = HChart::H0;
  return p;
}

HarperPoint HarperPoint::degenerate(HChart chart, double lambda, cplx a, double h) {
  HarperPoint p;
  p.lambda = lambda;
  p.a_free = a;
  p.h = h;
  p.chart = chart;
  switch (chart) {
    case HChart::h0_plus: p.s = 1.0, p.t = 0.0; break;
    case HChart::h0_minus: p.s = -1.0, p.t = 0.0; break;
    case HChart::h1_plus: p.s = 0.0, p.t = 1.0; break;
    case HChart::h1_minus: p.s = 0.0, p.t = -1.0; break;
    case HChart::H0: throw Error(Errc::ChartViolation, "H0 points are given by s and t");
  }
  return p;
}

HarperPoint HarperPoint::harper(double lambda, cplx E, double h) {
  return degenerate(HChart::h0_minus, lambda, 2.0 * E, h);
}

cplx HarperPoint::a() const {
  if (chart != HChart::H0) return a_free;
  return lambda * (1.0 - s * s - t * t) / (s * t);
}

MatrixTrigPoly hfamily_matrix(const HarperPoint& p) {
  if (!(p.lambda > 0)) throw Error(Errc::ChartViolation, "lambda must be positive");
  if (p.chart == HChart::H0) {
    if (p.s == 0.0 || p.t == 0.0 || !std::isfinite(std::abs(p.s * p.t)))
      throw Error(Errc::ChartViolation, "s t must be nonzero on H0");
  } else {
    HarperPoint q = HarperPoint::degenerate(p.chart, p.lambda, p.a_free, p.h);
    if (q.s != p.s || q.t != p.t) throw Error(Errc::ChartViolation, "s, t do not lie on the chart");
  }
  const cplx s = p.s, t = p.t, lam = p.lambda;
  return MatrixTrigPoly(TrigPoly::constant(p.a()) + TrigPoly::cos_term(1, -2.0 * lam),
                        TrigPoly(std::map<int, cplx>{{0, s}, {-1, t}}), TrigPoly(std::map<int, cplx>{{0, -s}, {1, -t}}),
                        TrigPoly::constant(s * t / lam));
}

namespace {

double coeff_scale(const SlotCoeffs& c) {
  return std::max({std::abs(c.A), std::abs(c.B), std::abs(c.C), std::abs(c.D)});
}

}  // namespace

HarperPair symmetric_pair(const MatrixTrigPoly& M, double lambda, double h, const PairOptions& opt) {
  if (!(lambda > 0)) throw Error(Errc::ChartViolation, "lambda must be positive");
  const double xi = std::log(lambda);
  TPIndices ib = tp_indices(M.b);
  ReduceOptions ro;
  ro.phi_plus = I * xi - PI - h * ib.n_plus / 2.0;
  ro.phi_minus = -I * xi - PI - h * ib.n_minus / 2.0;
  ReducedProblem R = reduce(M, h, ro);
  MinimalSolution d0 = assemble_minimal(R, Kind::D, opt.assembly);
  CanonicalBases bases = canonical_bases(M, h, R.phi_plus, R.phi_minus);
  SlotCoeffs c0 = min_asymp_coeffs(d0, bases, opt.slots);
  if (std::abs(c0.C) < opt.degenerate_tol * coeff_scale(c0))
    throw Error(Errc::DegenerateWronskian, "the asymptotic coefficient C_D vanishes");

  HarperPair p;
  p.M = M;
  p.lambda = lambda;
  p.h = h;
  p.d = d0.scaled(1.0 / c0.C);
  p.cd = c0.scaled(1.0 / c0.C);

  const MinimalSolution d = p.d;
  VectorSampler sb = [d, h](cplx z, double shift) -> Eigen::Vector2cd {
    Eigen::Vector2cd v = d.eval(2 * PI - z + h, -shift);
    return Eigen::Vector2cd(v(1), v(0));
  };
  BaseLocator lb = [d, h](cplx z, double shift) { return 2 * PI + h - d.base_point(2 * PI - z + h, -shift); };
  SlotCoeffs none;
  none.kind = Kind::B;
  MinimalSolution b0(Kind::B, M, h, R.phi_plus, R.phi_minus, none, sb, lb, d.info());
  p.cb = min_asymp_coeffs(b0, bases, opt.slots);
  p.b = MinimalSolution(Kind::B, M, h, R.phi_plus, R.phi_minus, p.cb, sb, lb, d.info());

  const cplx z0(0.5 * h, 0.0);
  p.w = wronskian(p.d, p.b, z0);
  if (!(std::abs(p.w) > opt.degenerate_tol * p.d(z0).norm() * p.b(z0).norm()))
    throw Error(Errc::DegenerateWronskian, "psi_D and psi_B are dependent");

  const double sc = std::max(coeff_scale(p.cd), coeff_scale(p.cb));
  const cplx e4 = std::exp(-4.0 * PI * PI * I / h);
  p.relations = {std::abs(p.cb.A + p.cd.C) / sc, std::abs(p.cb.B + p.cd.D * e4) / sc, std::abs(p.cb.C + p.cd.A) / sc,
                 std::abs(p.cb.D + p.cd.B) / sc};
  return p;
}

HarperPair harper_pair(double lambda, cplx E, double h, const PairOptions& opt) {
  return symmetric_pair(harper_matrix(lambda, E), lambda, h, opt);
}

ShapeReport shape_residual(const MonodromyResult& r, double lambda1, cplx s1, cplx t1) {
  ShapeReport rep;
  const double sc = std::max({lambda1, std::abs(s1), std::abs(t1)});
  const cplx a1 = lambda1 * (1.0 - s1 * s1 - t1 * t1) / (s1 * t1);
  auto predicted = [&](int e, int l) -> cplx {
    switch (e) {
      case 0: return l == 0 ? a1 : std::abs(l) == 1 ? cplx(-lambda1) : 0.0;
      case 1: return l == 0 ? s1 : l == -1 ? t1 : 0.0;
      case 2: return l == 0 ? -s1 : l == 1 ? -t1 : 0.0;
      default: return l == 0 ? s1 * t1 / lambda1 : 0.0;
    }
  };
  const int N = int(r.harmonics[0].size());
  for (int e = 0; e < 4; ++e) {
    for (int l = -N / 2; l < N / 2; ++l) {
      // the constant of M11 is tested through the det identity below
      if (e == 0 && l == 0) continue;
      rep.entry[size_t(e)] = std::max(rep.entry[size_t(e)], std::abs(r.harmonic(e, l) - predicted(e, l)) / sc);
    }
    rep.worst = std::max(rep.worst, rep.entry[size_t(e)]);
  }
  rep.a_identity = std::abs(r.harmonic(0, 0) * s1 * t1 - lambda1 * (1.0 - s1 * s1 - t1 * t1)) / lambda1;
  rep.worst = std::max(rep.worst, rep.a_identity);
  for (int l = -N / 2 + 1; l < N / 2; ++l)
    rep.symmetry = std::max(rep.symmetry, std::abs(r.harmonic(2, l) + r.harmonic(1, -l)) / sc);
  return rep;
}

namespace {

[[noreturn]] void shape_mismatch(const ShapeReport& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "monodromy off the one-harmonic shape: %.3g %.3g %.3g %.3g, det identity %.3g",
                s.entry[0], s.entry[1], s.entry[2], s.entry[3], s.a_identity);
  throw Error(Errc::ShapeMismatch, buf);
}

}  // namespace

HarperMonodromy harper_monodromy(double lambda, cplx E, double h, const ShapeOptions& opt) {
  HarperPair p = harper_pair(lambda, E, h, opt.pair);
  HarperMonodromy m;
  m.M = monodromy_matrix(p.d, p.b, opt.monodromy);
  m.lambda1 = std::pow(lambda, 2 * PI / h);
  m.s = -m.lambda1 * p.cd.D / p.cd.B;
  m.t = -m.lambda1 * p.cd.A / p.cd.C;
  m.a = m.lambda1 * (1.0 - m.s * m.s - m.t * m.t) / (m.s * m.t);
  m.shape = shape_residual(m.M, m.lambda1, m.s, m.t);
  if (!(m.shape.worst < opt.shape_tol)) shape_mismatch(m.shape);
  return m;
}

double step_map(double h, double rational_tol) {
  if (!(h > 0 && h < 2 * PI)) throw Error(Errc::BadStep, "step must lie in (0, 2pi)");
  const long double two_pi = 6.283185307179586476925286766559005768L;
  const long double r = two_pi / (long double)h;
  const long double f = r - std::floor(r);
  if (f < rational_tol || 1.0L - f < rational_tol)
    throw Error(Errc::RationalTermination, "2 pi / h is an integer: the procedure ends");
  return double(two_pi * f);
}

RenormStep renorm_step(const HarperPoint& p, const RenormOptions& opt) {
  const double h1 = step_map(p.h, opt.rational_tol);
  MatrixTrigPoly M = hfamily_matrix(p);
  HarperPair pair = symmetric_pair(M, p.lambda, p.h, opt.shape.pair);

  RenormStep st;
  st.M = monodromy_matrix(pair.d, pair.b, opt.shape.monodromy);
  st.det_residual = st.M.det_residual;
  const double lam1 = std::pow(p.lambda, 2 * PI / p.h);
  st.s_fit = st.M.harmonic(1, 0);
  st.t_fit = st.M.harmonic(1, -1);

  const SlotCoeffs& c = pair.cd;
  const cplx nan(std::numeric_limits<double>::quiet_NaN(), 0.0);
  st.s_formula = st.t_formula = nan;
  if (p.chart == HChart::H0) {
    const cplx f = -I * std::sqrt(p.lambda) * std::exp(I * p.h / 8.0);
    st.s_formula = -(f / p.s) * lam1 * c.D / c.B;
    st.t_formula = -(f / p.t) * lam1 * c.A / c.C;
  } else if (p.chart == HChart::h0_minus) {
    st.s_formula = -lam1 * c.D / c.B;
    st.t_formula = -lam1 * c.A / c.C;
  }
  st.formula_residual = std::isnan(st.s_formula.real())
                            ? std::numeric_limits<double>::quiet_NaN()
                            : std::max(std::abs(st.s_formula - st.s_fit) / std::abs(st.s_fit),
                                       std::abs(st.t_formula - st.t_fit) / std::abs(st.t_fit));

  const double tol = opt.degenerate_tol;
  const bool s0 = std::abs(st.s_fit) < tol * std::max(1.0, lam1), t0 = std::abs(st.t_fit) < tol * std::max(1.0, lam1);
  if (s0 && t0) throw Error(Errc::ShapeMismatch, "both off-diagonal harmonics vanish");
  if (s0 || t0) {
    // a degenerate chart: the surviving harmonic must be +-1
    cplx v = s0 ? st.t_fit : st.s_fit;
    int sign = v.real() > 0 ? 1 : -1;
    HChart ch = s0 ? (sign > 0 ? HChart::h1_plus : HChart::h1_minus) : (sign > 0 ? HChart::h0_plus : HChart::h0_minus);
    st.next = HarperPoint::degenerate(ch, lam1, st.M.harmonic(0, 0), h1);
    st.shape = shape_residual(st.M, lam1, s0 ? 0.0 : cplx(sign), s0 ? cplx(sign) : 0.0);
    // the det identity does not fix a on these charts
    st.shape.worst = std::max({st.shape.entry[0], st.shape.entry[1], st.shape.entry[2], st.shape.entry[3]});
  } else {
    st.next = HarperPoint::surface(lam1, st.s_fit, st.t_fit, h1);
    st.shape = shape_residual(st.M, lam1, st.s_fit, st.t_fit);
  }
  st.next.j = p.j + 1;
  if (!(st.shape.worst < opt.shape.shape_tol)) shape_mismatch(st.shape);
  return st;
}

Trajectory renorm_iterate(const HarperPoint& start, int steps, const RenormOptions& opt) {
  if (steps < 1) throw Error(Errc::Unsupported, "at least one step is required");
  Trajectory tr;
  TrajectoryStep first;
  first.point = start;
  first.det_residual = hfamily_matrix(start).det_residual();
  tr.points.push_back(first);
  HarperPoint p = start;
  for (int k = 0; k < steps; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      RenormStep st = renorm_step(p, opt);
      TrajectoryStep ts;
      ts.point = st.next;
      ts.shape_residual = st.shape.worst;
      ts.det_residual = st.det_residual;
      ts.formula_residual = st.formula_residual;
      ts.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      tr.points.push_back(ts);
      p = st.next;
    } catch (const Error& e) {
      tr.termination = e.what();
      break;
    }
  }
  return tr;
}

}  // namespace monodromize
