#pragma once

#include <vector>

#include "monodromize/errors.hpp"

namespace monodromize {

// Branch of ln(1 + e^{-iz}) vanishing at -i inf, continuous on the plane cut
// along (-inf, -pi] and [pi, inf).
cplx l0_eval(cplx z);
// Integral of l0 from -i inf to z inside the cut plane.
cplx L0_eval(cplx z);

struct SigmaOptions {
  double pole_guard = 1e-3;
  double tail_tol = 1e-15;
  double cache_height = 60.0;  // L0 samples are tabulated for |Im z'| up to this
  double max_re_over_h = 50.0;  // evaluation rejected for |Re z| beyond this many h
};

struct SigmaValue {
  cplx value;
  cplx log;        // a logarithm of value; meaningless when value == 0
  bool near_singular = false;
  cplx lattice_point{NAN, NAN};
};

// sigma(z + h) = (1 + e^{-iz}) sigma(z - h), analytic and zero-free in
// S0 = {|Re z| < pi + h}, sigma -> 1 at -i inf.
class SigmaEngine {
public:
  explicit SigmaEngine(double h, SigmaOptions opt = {});

  double h() const { return h_; }
  const SigmaOptions& options() const { return opt_; }

  // Inside S0 only; OutOfStrip otherwise.
  cplx theta0(cplx z) const;
  SigmaValue eval(cplx z) const;
  cplx operator()(cplx z) const { return eval(z).value; }
  // log sigma along the same reduction; NearSingular if z sits on the lattice.
  cplx log_sigma(cplx z) const;

  // Residue at the pole -pi - h - 2 pi j - 2 h k and derivative at the zero
  // pi + h + 2 pi j + 2 h k.
  cplx pole_residue(int j, int k) const;
  cplx zero_derivative(int j, int k) const;
  static cplx pole_point(double h, int j, int k) { return -PI - h - 2 * PI * j - 2 * h * k; }
  static cplx zero_point(double h, int j, int k) { return PI + h + 2 * PI * j + 2 * h * k; }

  // sqrt(h/pi) e^{-i pi^2/12h - i pi/4 - ih/12}
  cplx residue_closed_form() const;
  // (1/sqrt 2) e^{-i pi^2/12h + ih/24}
  cplx value_at_minus_pi() const;

  // Distance from z to the nearest lattice zero or pole, with that point.
  double lattice_distance(cplx z, cplx* nearest = nullptr) const;

private:
  struct Line {
    double x0;
    std::vector<cplx> L;  // L0(x0 + i k deta), k in [-kmax, kmax]
  };
  cplx theta0_line(cplx z, double x0, double deta, const Line* line) const;

  double h_;
  SigmaOptions opt_;
  double deta_;
  double dmin_;
  long kmax_;
  std::vector<Line> lines_;
};

}  // namespace monodromize
