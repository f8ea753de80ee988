#pragma once

#include <vector>

#include "monodromize/errors.hpp"

namespace monodromize {

// A point the curve must stay away from. side < 0 keeps it to the left of the
// curve, side > 0 to the right, 0 lets the builder choose.
struct Forbidden {
  cplx z;
  double guard;
  int side = 0;
};

struct ContourOptions {
  double T = 28.0;
  double h = 1.0;        // step of the equation; sets the panel grading
  double density = 0.5;  // panel count scales linearly with this where the kernel oscillates
  double join = 1.5;     // half height of the segment joining the two asymptotes
  double max_slope = 2.0;  // |dx/dy| on joins and detours
  double min_angle = 0.2;  // radians to the horizontal, checked
  int order = 16;
};

// Strictly vertical piecewise-linear curve x(y), -T <= y <= T, oriented upward.
struct Contour {
  std::vector<cplx> knots;  // Im strictly increasing
  double T = 0.0;
  double x_up = 0.0, x_down = 0.0;
  double h = 1.0;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;  // d zeta
  std::vector<double> node_y;

  double x_at(double y) const;
  // horizontal signed distance, positive to the right
  double offset(cplx z) const { return z.real() - x_at(z.imag()); }
  double min_angle() const;
  // integral of d zeta / (zeta - p) along the truncated curve; for p on the
  // curve, the limit from the left (side < 0) or the right (side > 0)
  cplx log_integral(cplx p, int side = 0) const;
  // smallest Euclidean distance from p to the truncated curve
  double distance(cplx p) const;
  size_t size() const { return nodes.size(); }
};

Contour build_contour(double asymptote_up, double asymptote_down, const std::vector<Forbidden>& forbidden,
                      const ContourOptions& opt);

// Same knots, fresh quadrature.
Contour rediscretize(const Contour& c, double density, int order = 16);

}  // namespace monodromize
