#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "monodromize/errors.hpp"

namespace monodromize {

// f(z) = sum_l f_l e^{ilz}; coefficients below drop_tol * max|f_l| are removed.
class TrigPoly {
public:
  static constexpr double drop_tol = 1e-12;

  TrigPoly() = default;
  explicit TrigPoly(std::map<int, cplx> coeffs);
  static TrigPoly constant(cplx c);
  static TrigPoly monomial(int l, cplx c);
  static TrigPoly cos_term(int l, cplx amp);  // amp * cos(l z)

  const std::map<int, cplx>& coeffs() const { return c_; }
  cplx coeff(int l) const;
  bool is_zero() const { return c_.empty(); }
  int min_index() const;
  int max_index() const;

  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;

  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator-(const TrigPoly& o) const;
  TrigPoly operator*(const TrigPoly& o) const;
  TrigPoly operator*(cplx s) const;
  TrigPoly operator-() const;

private:
  void prune();
  std::map<int, cplx> c_;
};

cplx tp_eval(const TrigPoly& f, cplx z);

struct TPIndices {
  int n_plus;
  cplx f_plus;
  int n_minus;
  cplx f_minus;
};
TPIndices tp_indices(const TrigPoly& f);

TrigPoly tp_shift(const TrigPoly& f, cplx delta);
// f(k z + c) for integer k != 0.
TrigPoly tp_affine(const TrigPoly& f, int k, cplx c);

// Zeros with real part in [re_lo, re_lo + 2 pi), each repeated by multiplicity.
std::vector<cplx> tp_roots(const TrigPoly& f, double re_lo = -PI);

class MatrixTrigPoly {
public:
  TrigPoly a, b, c, d;

  MatrixTrigPoly() = default;
  // Throws ZeroB if b == 0 and Degenerate if det differs from 1.
  MatrixTrigPoly(TrigPoly a, TrigPoly b, TrigPoly c, TrigPoly d, double det_tol = 1e-10);

  Eigen::Matrix2cd operator()(cplx z) const;
  TrigPoly det() const;
  double det_residual() const;  // max over 64 points of |det - 1|
};

class RatioTrig {
public:
  TrigPoly num, den;

  RatioTrig() = default;
  RatioTrig(TrigPoly n, TrigPoly d);
  cplx operator()(cplx z) const { return num(z) / den(z); }
};

struct RhoV {
  RatioTrig rho;
  RatioTrig v;
};
RhoV rho_v(const MatrixTrigPoly& M, double h);

struct OmegaReport {
  int n = 0;
  bool a_in_tau = false, b_in_tau = false, c_in_tau = false, d_in_tau = false;
  bool a_orders = false;
  bool member = false;
  int stratum_m = 0, stratum_l = 0;
};
OmegaReport omega_classify(const MatrixTrigPoly& M, int n);

struct CFExpansion {
  std::vector<long> p;
  std::vector<double> h_seq;
  bool terminated = false;
};
CFExpansion cf_expand(double h, int max_depth, double rational_tol = 1e-12);

}  // namespace monodromize
