#include "monodromize/contour.hpp"

#include <algorithm>
#include <cmath>

#include "monodromize/quadrature.hpp"

namespace monodromize {

namespace {

// Panel length: the kernel oscillates like exp(2i|y| Re(z)/h) along the curve.
double panel_length(double y, double h, double density) {
  return std::min(0.5, 5.0 * h / (std::abs(y) + 1.0)) / density;
}

void discretize(Contour& c, double density, int order) {
  c.nodes.clear();
  c.weights.clear();
  c.node_y.clear();
  const GaussRule& g = gauss_legendre(order);
  for (size_t s = 0; s + 1 < c.knots.size(); ++s) {
    cplx a = c.knots[s], b = c.knots[s + 1];
    double ya = a.imag(), yb = b.imag();
    double slope = (b.real() - a.real()) / (yb - ya);
    double y = ya;
    while (y < yb - 1e-14) {
      // arc length of a panel, not its height
      double L = panel_length(std::max(std::abs(y), std::abs(std::min(yb, y + 1.0))), c.h, density) /
                 std::sqrt(1.0 + slope * slope);
      double rest = yb - y;
      if (rest < 1.3 * L) L = rest > L ? rest / 2 : rest;
      double lo = y, hi = y + L;
      for (int i = 0; i < order; ++i) {
        double yy = 0.5 * (lo + hi) + 0.5 * L * g.x[i];
        double xx = a.real() + slope * (yy - ya);
        c.nodes.emplace_back(xx, yy);
        c.weights.push_back(0.5 * L * g.w[i] * cplx(slope, 1.0));
        c.node_y.push_back(yy);
      }
      y = hi;
    }
  }
}

}  // namespace

double Contour::x_at(double y) const {
  if (y <= knots.front().imag()) return knots.front().real();
  if (y >= knots.back().imag()) return knots.back().real();
  auto it = std::lower_bound(knots.begin(), knots.end(), y, [](cplx k, double v) { return k.imag() < v; });
  size_t i = size_t(it - knots.begin());
  if (i == 0) return knots[0].real();
  cplx a = knots[i - 1], b = knots[i];
  double t = (y - a.imag()) / (b.imag() - a.imag());
  return a.real() + t * (b.real() - a.real());
}

double Contour::min_angle() const {
  double best = PI / 2;
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    cplx d = knots[i + 1] - knots[i];
    best = std::min(best, std::atan2(d.imag(), std::abs(d.real())));
  }
  return best;
}

cplx Contour::log_integral(cplx p, int side) const {
  const double eps = 1e-10 * (1.0 + std::abs(p));
  for (const cplx& k : knots)
    if (std::abs(k - p) < eps) {
      // corner of the curve: one-sided limit taken just beside it
      return log_integral(p + (side < 0 ? -10.0 : 10.0) * eps, 0);
    }
  cplx s = 0.0;
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    cplx a = knots[i] - p, b = knots[i + 1] - p;
    cplx q = b / a;
    if (side != 0 && q.real() < 0 && std::abs(q.imag()) <= 1e-14 * std::abs(q))
      s += std::log(std::abs(q)) + (side < 0 ? 1.0 : -1.0) * PI * I;  // p on this segment
    else
      s += std::log(q);
  }
  return s;
}

double Contour::distance(cplx p) const {
  double best = INFINITY;
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    cplx a = knots[i], d = knots[i + 1] - a;
    double t = std::clamp(std::real((p - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
    best = std::min(best, std::abs(p - (a + t * d)));
  }
  return best;
}

namespace {

// piecewise-linear x(y) as knots (y, x), y increasing
using PL = std::vector<std::pair<double, double>>;

double pl_eval(const PL& f, double y) {
  if (y <= f.front().first) return f.front().second;
  if (y >= f.back().first) return f.back().second;
  auto it = std::lower_bound(f.begin(), f.end(), y, [](const auto& k, double v) { return k.first < v; });
  auto a = *(it - 1), b = *it;
  return a.second + (y - a.first) / (b.first - a.first) * (b.second - a.second);
}

PL pl_combine(const PL& f, const PL& g, bool take_max) {
  std::vector<double> ys;
  for (auto& k : f) ys.push_back(k.first);
  for (auto& k : g)
    if (k.first > f.front().first && k.first < f.back().first) ys.push_back(k.first);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<double> all;
  for (size_t i = 0; i < ys.size(); ++i) {
    all.push_back(ys[i]);
    if (i + 1 == ys.size()) break;
    double d0 = pl_eval(f, ys[i]) - pl_eval(g, ys[i]);
    double d1 = pl_eval(f, ys[i + 1]) - pl_eval(g, ys[i + 1]);
    if (d0 * d1 < 0) all.push_back(ys[i] + (ys[i + 1] - ys[i]) * d0 / (d0 - d1));
  }
  PL r;
  for (double y : all) {
    double a = pl_eval(f, y), b = pl_eval(g, y);
    r.emplace_back(y, take_max ? std::max(a, b) : std::min(a, b));
  }
  PL out{r.front()};
  for (size_t i = 1; i + 1 < r.size(); ++i) {
    double s1 = (r[i].second - out.back().second) / (r[i].first - out.back().first);
    double s2 = (r[i + 1].second - r[i].second) / (r[i + 1].first - r[i].first);
    if (std::abs(s1 - s2) > 1e-12 * (1.0 + std::abs(s1))) out.push_back(r[i]);
  }
  out.push_back(r.back());
  return out;
}

}  // namespace

Contour build_contour(double x_up, double x_down, const std::vector<Forbidden>& forbidden, const ContourOptions& opt) {
  for (const auto& f : forbidden)
    if (!(f.guard > 0)) throw Error(Errc::Infeasible, "guard must be positive", f.z);
  const double T = opt.T, ms = opt.max_slope;
  const double J = std::max(opt.join, std::abs(x_up - x_down) / (2 * ms));
  PL x = {{-T, x_down}, {-J, x_down}, {J, x_up}, {T, x_up}};
  std::vector<int> sides(forbidden.size());
  for (size_t k = 0; k < forbidden.size(); ++k) {
    const auto& f = forbidden[k];
    const double g = 1.02 * f.guard, yp = f.z.imag();
    int side = f.side;
    if (side == 0) side = (pl_eval(x, yp) >= f.z.real()) ? -1 : 1;
    sides[k] = side;
    // plateau over |y - yp| <= g, ramps of slope max_slope outside
    double sg = side < 0 ? 1.0 : -1.0;
    double top = f.z.real() + sg * g;
    PL bump;
    if (yp - g > -T) bump.emplace_back(-T, top - sg * ms * (yp - g + T));
    bump.emplace_back(std::max(-T, yp - g), top);
    bump.emplace_back(std::min(T, yp + g), top);
    if (yp + g < T) bump.emplace_back(T, top - sg * ms * (T - yp - g));
    x = pl_combine(x, bump, side < 0);
  }
  Contour c;
  c.T = T;
  c.x_up = x_up;
  c.x_down = x_down;
  c.h = opt.h;
  for (auto& k : x) c.knots.emplace_back(k.second, k.first);

  for (size_t k = 0; k < forbidden.size(); ++k) {
    const auto& f = forbidden[k];
    double off = c.offset(f.z);
    bool side_ok = (sides[k] < 0) ? off < 0 : off > 0;
    if (c.distance(f.z) < f.guard || !side_ok)
      throw Error(Errc::Infeasible, "no vertical passage clears the forbidden points", f.z);
  }
  if (c.min_angle() < opt.min_angle) throw Error(Errc::Infeasible, "contour not strictly vertical");
  discretize(c, opt.density, opt.order);
  return c;
}

Contour rediscretize(const Contour& c, double density, int order) {
  Contour r = c;
  discretize(r, density, order);
  return r;
}

}  // namespace monodromize
