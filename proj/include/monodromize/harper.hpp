#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "monodromize/monodromy.hpp"

namespace monodromize {

// [[2E - 2 lambda cos z, -1], [1, 0]]
MatrixTrigPoly harper_matrix(double lambda, cplx E);

// Charts of the family H(lambda): the surface H0 with s t != 0, and the lines
// h0+- (s, t) = (+-1, 0) and h1+- (s, t) = (0, +-1) where a is free.
enum class HChart { H0, h0_plus, h0_minus, h1_plus, h1_minus };
const char* chart_name(HChart c);

// [[a - 2 lambda cos z, s + t e^{-iz}], [-s - t e^{iz}, s t / lambda]]
struct HarperPoint {
  double lambda = 1.0;
  cplx s = 1.0, t = 1.0;
  cplx a_free = 0.0;  // used on the degenerate charts
  double h = 1.0;
  int j = 0;
  HChart chart = HChart::H0;

  static HarperPoint surface(double lambda, cplx s, cplx t, double h);
  static HarperPoint degenerate(HChart chart, double lambda, cplx a, double h);
  // the Harper matrix is the point a = 2E of h0-
  static HarperPoint harper(double lambda, cplx E, double h);

  // lambda (1 - s^2 - t^2)/(s t) on H0
  cplx a() const;
};

// ChartViolation when (s, t) does not fit the chart.
MatrixTrigPoly hfamily_matrix(const HarperPoint& p);

struct HarperPair {
  MatrixTrigPoly M;
  double lambda = 1.0, h = 1.0;
  MinimalSolution d, b;  // C_D = 1; psi_B(z) = sigma psi_D(2 pi - z + h)
  SlotCoeffs cd, cb;
  cplx w;
  // A_B + C_D, B_B + D_D e^{-4 pi^2 i/h}, C_B + A_D, D_B + B_D relative to the largest coefficient
  std::array<double, 4> relations{};
};

struct PairOptions {
  AssemblyOptions assembly;
  SlotOptions slots;
  double degenerate_tol = 1e-8;  // C_D and the wronskian, relative
};

// The symmetric pair for a matrix of the family: phi+ = i xi - pi - h n+(b)/2,
// phi- = -i xi - pi - h n-(b)/2 with xi = ln lambda.
// DegenerateWronskian when C_D or {psi_D, psi_B} vanishes.
HarperPair symmetric_pair(const MatrixTrigPoly& M, double lambda, double h, const PairOptions& opt = {});
HarperPair harper_pair(double lambda, cplx E, double h, const PairOptions& opt = {});

// Deviation of a fitted monodromy from
// [[a1 - 2 lambda1 cos z1, s1 + t1 e^{-iz1}], [-s1 - t1 e^{iz1}, s1 t1 / lambda1]], per entry,
// relative to max(lambda1, |s1|, |t1|).
struct ShapeReport {
  std::array<double, 4> entry{};
  double worst = 0.0;
  double a_identity = 0.0;  // |a0 s t - lambda1 (1 - s^2 - t^2)| / lambda1, a0 fitted
  double symmetry = 0.0;    // M21 harmonic l against -M12 harmonic -l
};
ShapeReport shape_residual(const MonodromyResult& r, double lambda1, cplx s1, cplx t1);

struct HarperMonodromy {
  MonodromyResult M;
  cplx s, t, a;  // s, t from the asymptotic coefficients, a = lambda1 (1 - s^2 - t^2)/(s t)
  double lambda1 = 1.0;
  ShapeReport shape;
};

struct ShapeOptions {
  PairOptions pair;
  MonodromyOptions monodromy;
  double shape_tol = 1e-4;
};

// ShapeMismatch when the fitted matrix departs from the one-harmonic shape.
HarperMonodromy harper_monodromy(double lambda, cplx E, double h, const ShapeOptions& opt = {});

// 2 pi frac(2 pi / h), evaluated in extended precision; RationalTermination when
// frac(2 pi / h) lies within rational_tol of an integer.
double step_map(double h, double rational_tol = 1e-12);

struct RenormStep {
  HarperPoint next;
  MonodromyResult M;
  // from the asymptotic coefficients, with the factors -i sqrt(lambda) e^{ih/8}/s and /t on H0;
  // NaN on the charts other than H0 and h0-
  cplx s_formula, t_formula;
  cplx s_fit, t_fit;  // read off M12
  double formula_residual = 0.0;
  ShapeReport shape;
  double det_residual = 0.0;
};

struct RenormOptions {
  ShapeOptions shape;
  double rational_tol = 1e-12;
  double degenerate_tol = 1e-8;  // |s| or |t| below this moves the point to a degenerate chart
};

// One monodromization step: the monodromy of the pair as a function of z1 = 2 pi z / h,
// projected to H(lambda^{2 pi/h}), with step h' = step_map(h).
RenormStep renorm_step(const HarperPoint& p, const RenormOptions& opt = {});

struct TrajectoryStep {
  HarperPoint point;
  double shape_residual = 0.0, det_residual = 0.0, formula_residual = 0.0;
  double seconds = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> points;  // the start point first
  std::string termination;              // empty when all steps ran
};

Trajectory renorm_iterate(const HarperPoint& start, int steps, const RenormOptions& opt = {});

}  // namespace monodromize
