#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "monodromize/trigpoly.hpp"

namespace monodromize {

enum class Side { Plus, Minus };

struct BlochOptions {
  double tol = 1e-15;  // continued fractions stop when successive depths agree to tol
  int max_depth = 200;
  double y_max = 40.0;
  double y_step = 0.25;
  double margin = 2.0;  // homological sampling line sits this far inside the vicinity
  double denom_guard = 1e-8;
  double coef_tol = 1e-16;
};

// Periodic solutions of Phi(z) + rho(z)/Phi(z-h) = v(z) near +i inf or -i inf.
class RiccatiSolution {
 public:
  RiccatiSolution(const RhoV& rv, double h, Side side, BlochOptions opt = {});

  Side side() const { return side_; }
  double h() const { return h_; }
  // valid for Im z > Y (Plus) or Im z < -Y (Minus)
  double Y() const { return Y_; }
  double mu() const { return mu_; }
  int n_v() const { return n_v_; }
  cplx v_lead() const { return v_lead_; }
  bool inside(cplx z) const { return side_ == Side::Plus ? z.imag() > Y_ : z.imag() < -Y_; }

  cplx v(cplx z) const { return rv_.v(z); }
  cplx rho(cplx z) const { return rv_.rho(z); }
  cplx phi2(cplx z) const;  // ~ v(z)
  cplx phi1(cplx z) const;  // ~ rho(z+h)/v(z+h)
  cplx phi2_depth(cplx z, int depth) const;
  cplx phi1_depth(cplx z, int depth) const;

 private:
  RhoV rv_;
  double h_;
  Side side_;
  BlochOptions opt_;
  double Y_ = 0.0, mu_ = 1.0;
  int n_v_ = 0;
  cplx v_lead_;
};

// phi(z+h) - phi(z) = g(z) for 2 pi periodic g decaying towards the chosen side.
class HomologicalSolution {
 public:
  HomologicalSolution() = default;
  // g is sampled on Im z = y
  HomologicalSolution(const std::function<cplx(cplx)>& g, double h, Side side, double y, BlochOptions opt = {});

  cplx operator()(cplx z) const;
  // Fourier coefficients of g on e^{i s k (z - i y)}, k = 1, 2, ..., s = +1 (Plus) or -1 (Minus)
  const std::vector<cplx>& g_coeffs() const { return gk_; }
  cplx g_mean() const { return g0_; }
  double height() const { return y_; }

 private:
  double h_ = 1.0, y_ = 0.0, s_ = 1.0;
  std::vector<cplx> gk_, phik_;
  cplx g0_ = 0.0;
};

// Canonical Bloch pair f_{1,2} (Plus) or g_{1,2} (Minus) with
// first components exp(+-(i/2hn)(nz+phi)^2 +- i(n - n_b) z/2 + o(1)).
class BlochBasis {
 public:
  BlochBasis(const MatrixTrigPoly& M, double h, Side side, std::optional<cplx> phi = std::nullopt,
             BlochOptions opt = {});

  Side side() const { return side_; }
  double h() const { return h_; }
  cplx phi() const { return phi_; }
  double Y() const { return ric_.Y(); }
  int n_v() const { return n_v_; }
  int n_b() const { return n_b_; }
  cplx v_lead() const { return ric_.v_lead(); }
  cplx b_lead() const { return b_lead_; }
  const RiccatiSolution& riccati() const { return ric_; }
  const HomologicalSolution& homological(int which) const { return hom_[which - 1]; }

  // principal value i Log v+ - h n+(b)/2, or -i Log v- - h n-(b)/2
  static cplx principal_phi(const MatrixTrigPoly& M, double h, Side side);

  Eigen::Vector2cd operator()(int which, cplx z) const;
  cplx log_first(int which, cplx z) const;
  cplx first(int which, cplx z) const { return std::exp(log_first(which, z)); }
  cplx ratio(int which, cplx z) const;  // first(z+h)/first(z)
  // leading exponent without the decaying correction
  cplx log_model(int which, cplx z) const;

  cplx det_target() const;  // v+/b+ or -v-/b-
  cplx det(cplx z) const;

  cplx multiplier(int which, cplx z) const;  // u(z) = f(z + 2 pi)/f(z)
  cplx multiplier_closed(int which) const;
  // u(z) e^{-+ 2 pi i n z/h}
  cplx multiplier_leading(int which, cplx z) const;

 private:
  double sigma(int which) const { return which == 1 ? 1.0 : -1.0; }
  cplx Q(int which, cplx z) const;
  cplx Phi(int which, cplx z) const;
  cplx log_raw(int which, cplx z) const;
  cplx log_norm(cplx z) const;  // log of the h-periodic renormalization of solution 1

  MatrixTrigPoly M_;
  double h_;
  Side side_;
  BlochOptions opt_;
  RiccatiSolution ric_;
  cplx phi_;
  int n_v_ = 0, n_b_ = 0;
  cplx b_lead_;
  HomologicalSolution hom_[2];
};

struct ConsistencyVerdict {
  cplx phi_plus, phi_minus;
  double distance = 0.0;  // from phi_plus - phi_minus to the excluded set
  bool consistent = false;
};

// Excluded set: +-(2 pi + h + 2 h l + 2 pi m), l, m >= 0.
ConsistencyVerdict consistency_check(cplx phi_plus, cplx phi_minus, double h, double margin = 1e-6);

// Principal parameters, phi_plus shifted by multiples of 2 pi until consistent.
ConsistencyVerdict consistent_phis(const MatrixTrigPoly& M, double h, double margin = 1e-6);

}  // namespace monodromize
