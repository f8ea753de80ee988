#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "monodromize/bloch.hpp"
#include "monodromize/fredholm.hpp"
#include "monodromize/sigma.hpp"
#include "monodromize/trigpoly.hpp"

namespace monodromize {

enum class Kind { A, B, C, D };
const char* kind_name(Kind k);

// t(z) = e^{i n- z/2} prod_l sigma(z + pi - z_l) / sigma(z + pi - z_l - h),
// solving t(z+h) = rho(z) t(z-h) with rho = b/b(z-h).
class TFunction {
public:
  TFunction(const TrigPoly& b, double h, std::vector<cplx> zeros);

  double h() const { return h_; }
  const std::vector<cplx>& zeros() const { return zl_; }
  int n_plus() const { return n_plus_; }
  int n_minus() const { return n_minus_; }
  int N() const { return n_plus_ + n_minus_; }
  // t ~ t_inf e^{-i n+ z/2} at +i inf
  cplx t_inf() const { return t_inf_; }

  cplx operator()(cplx z) const;
  // Cauchy mean on a circle of radius r
  cplx derivative(cplx z, double r) const;

private:
  double h_;
  std::vector<cplx> zl_;
  int n_plus_ = 0, n_minus_ = 0;
  cplx t_inf_ = 1.0;
  std::shared_ptr<const SigmaEngine> sigma_;
};

// t with the zero representatives z_l whose offset from the curve x(y) lies in [0, 2 pi).
// RootOnContour when a zero of b(z) or b(z-h) sits on the curve.
TFunction t_build(const MatrixTrigPoly& M, double h, const std::function<double(cplx)>& offset);

struct ReduceOptions {
  std::optional<cplx> phi_plus, phi_minus;  // both or neither
  double margin = 0.3;
};

// Affine change z1 = alpha z + beta to the model variable.
struct Chart {
  int alpha = 1;
  cplx beta = 0.0;
  cplx to_model(cplx z) const { return double(alpha) * z + beta; }
  cplx from_model(cplx u) const { return (u - beta) / double(alpha); }
};

struct ReducedProblem {
  MatrixTrigPoly M;
  double h = 1.0;
  int n = 1;
  cplx phi_plus, phi_minus, phi, xi;
  double h1 = 1.0;
  int nb_plus = 0, nb_minus = 0;  // n+(b), n-(b)
  double consistency_distance = 0.0;

  // z1 = n z + phi + pi, and the reflected chart z1 = pi - phi - n z
  Chart chart_direct() const { return {n, phi + PI}; }
  Chart chart_mirror() const { return {-n, PI - phi}; }

  // v1 + e^{i(nz + phi- + pi)} + e^{-i(nz + phi+ + pi)} for the given t
  Sampler w(const TFunction& t) const;
  // exact trigonometric form when b has no zeros
  std::optional<TrigPoly> w_exact() const;
};

ReducedProblem reduce(const MatrixTrigPoly& M, double h, const ReduceOptions& opt = {});

// The matrix conj(M(conj z)).
MatrixTrigPoly conj_matrix(const MatrixTrigPoly& M);

// Leading Fourier coefficients of the expansion in the canonical bases. The slot
// of the kind's own letter holds the first coefficient (A1, B1, C1 or D1);
// `vanishing` carries the zeroth one there, which is zero in exact arithmetic.
struct SlotCoeffs {
  Kind kind = Kind::D;
  cplx A, B, C, D;
  cplx vanishing = 0.0;
  cplx slot(Kind k) const;
  SlotCoeffs scaled(cplx c) const;
};

enum class ZeroPolicy { Avoid, Carry };

struct AssemblyOptions {
  double density = 0.5;
  double tail_tol = 1e-12;
  ZeroPolicy policy = ZeroPolicy::Avoid;
  bool carry_fallback = true;  // carry zeros when no curve avoids them
  SolveOptions solve;
  int max_steps = 40;
};

// Evaluates psi at z, continued from the base strip -h <= offset - shift < 0.
using VectorSampler = std::function<Eigen::Vector2cd(cplx z, double shift)>;
// The base-strip point a value at z is continued from.
using BaseLocator = std::function<cplx(cplx z, double shift)>;

struct AssemblyInfo {
  size_t nodes = 0;
  double T = 0.0, mu = 1.0;
  double fredholm_residual = 0.0;
  double sigma_min = 0.0;
  int delta = 1;
  int carried = 0;
  // how far the zeros of b stay from the forbidden band; bounds the base shift
  double margin = 0.0;
};

class MinimalSolution {
public:
  MinimalSolution() = default;
  MinimalSolution(Kind kind, MatrixTrigPoly M, double h, cplx phi_plus, cplx phi_minus, SlotCoeffs coeffs,
                  VectorSampler sampler, BaseLocator base, AssemblyInfo info = {});

  Kind kind() const { return kind_; }
  const MatrixTrigPoly& matrix() const { return M_; }
  double h() const { return h_; }
  cplx phi_plus() const { return phi_plus_; }
  cplx phi_minus() const { return phi_minus_; }
  const SlotCoeffs& coeffs() const { return coeffs_; }
  const AssemblyInfo& info() const { return info_; }
  // admissible base shifts lie in [-max_shift, max_shift]
  double max_shift() const { return info_.margin / 2.0; }

  Eigen::Vector2cd operator()(cplx z) const { return sampler_(z, 0.0); }
  Eigen::Vector2cd eval(cplx z, double shift) const { return sampler_(z, shift); }
  const VectorSampler& sampler() const { return sampler_; }
  cplx base_point(cplx z, double shift) const { return base_(z, shift); }
  const BaseLocator& base_locator() const { return base_; }

  MinimalSolution scaled(cplx c) const;

private:
  Kind kind_ = Kind::D;
  MatrixTrigPoly M_;
  double h_ = 1.0;
  cplx phi_plus_, phi_minus_;
  SlotCoeffs coeffs_;
  VectorSampler sampler_;
  BaseLocator base_;
  AssemblyInfo info_;
};

MinimalSolution assemble_minimal(const ReducedProblem& R, Kind kind, const AssemblyOptions& opt = {});

struct CanonicalBases {
  std::shared_ptr<const BlochBasis> f, g;
};
CanonicalBases canonical_bases(const MatrixTrigPoly& M, double h, cplx phi_plus, cplx phi_minus);

struct SlotOptions {
  double height = 13.0;
  int samples = 64;
};

// Wronskian quotients against the canonical bases, Fourier coefficients on horizontal lines.
SlotCoeffs min_asymp_coeffs(const MinimalSolution& sol, const CanonicalBases& bases, const SlotOptions& opt = {});

}  // namespace monodromize
