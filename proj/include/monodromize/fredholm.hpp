#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "monodromize/contour.hpp"
#include "monodromize/model.hpp"

namespace monodromize {

using Sampler = std::function<cplx(cplx)>;

// Decay exponent mu of |w| <= C e^{(1-mu)|y|}, from log-slopes over |y| in [8, 14]
// along the vertical line through x0. Clamped to [0.05, 1].
double estimate_mu(const Sampler& w, double x0, double h);

// T such that the weighted tail e^{-mu T} is below tail_tol.
double truncation_height(double mu, double tail_tol = 1e-12);

// Nystrom discretization of
//   (K f)(z) = int_gamma kappa(z, zeta) f(zeta) d zeta,
//   kappa = (1/2ih) theta(z, zeta) [m(z) mt(zeta) - m(zeta) mt(z)] / W  w(zeta),
//   theta = cot(pi (zeta - z)/h) + i.
class KernelOp {
public:
  KernelOp(std::shared_ptr<const ModelPair> model, Sampler w, Contour gamma, double mu);

  const ModelPair& model() const { return *model_; }
  std::shared_ptr<const ModelPair> model_ptr() const { return model_; }
  const Contour& contour() const { return gamma_; }
  double mu() const { return mu_; }
  double h() const { return h_; }
  cplx W() const { return W_; }
  size_t size() const { return gamma_.size(); }
  bool trivial() const { return trivial_; }
  cplx w(cplx z) const { return w_(z); }

  // K(i, j) = kappa(zeta_i, zeta_j) omega_j
  const Eigen::MatrixXcd& matrix() const { return K_; }
  // p^{1/2} at the nodes
  const Eigen::VectorXd& sqrt_weight() const { return sp_; }
  // p(z) = e^{(1-mu)|y|} p0(z)^2 with p0 = 1 above the real axis and e^{pi |y|/h} below
  double log_weight(cplx z) const;
  // max of the weighted kernel over (1 + |eta|) e^{-mu(|y| + |eta|)/2}
  double bound_constant() const { return bound_; }

  const std::array<cplx, 2>& m_node(size_t j) const { return mn_[j]; }
  const std::array<cplx, 2>& mt_node(size_t j) const { return mtn_[j]; }
  cplx w_node(size_t j) const { return wn_[j]; }

  static cplx theta(cplx x);  // cot x + i, overflow free
  cplx kappa(cplx z, const std::array<cplx, 2>& mz, const std::array<cplx, 2>& mtz, cplx zeta,
             const std::array<cplx, 2>& mzeta, const std::array<cplx, 2>& mtzeta, cplx wzeta) const;
  cplx kappa(cplx z, cplx zeta) const;

private:
  std::shared_ptr<const ModelPair> model_;
  Sampler w_;
  Contour gamma_;
  double mu_, h_;
  cplx W_;
  bool trivial_ = false;
  std::vector<std::array<cplx, 2>> mn_, mtn_;
  std::vector<cplx> wn_;
  Eigen::MatrixXcd K_;
  Eigen::VectorXd sp_;
  double bound_ = 0.0;
};

enum class Rhs { Model, Zero };

// Simple zero z0 of b carried by the extended operator:
// the solution gains s * m(z, z0) * f(z0 + h).
struct ExtZero {
  cplx z0;
  cplx s;
};

struct SolveOptions {
  double sing_rel = 1e-8;  // sing_tol = sing_rel * ||I - K||
  double coupling_tol = 1e-6;
};

struct AsympCoeffs {
  cplx A, B, C, D;  // against m, mt above; m, e^{-2 pi i z/h} mt below
  cplx a, b, c, d;  // two-exponential coefficients, same layout as ModelCoeffs
};

class FredholmSolution {
public:
  const KernelOp& kernel() const { return *K_; }
  std::shared_ptr<const KernelOp> kernel_ptr() const { return K_; }
  int delta() const { return delta_; }
  const Eigen::VectorXcd& values() const { return psi_; }
  const std::vector<ExtZero>& zeros() const { return zeros_; }
  // f(z0 + h) for each carried zero
  const Eigen::VectorXcd& coupling() const { return sig_; }
  double residual() const { return residual_; }
  double sigma_min() const { return smin_; }
  double sing_tol() const { return stol_; }

  // continuation to |offset| < 2h
  cplx operator()(cplx z) const;
  AsympCoeffs asymptotics() const;

  // psi(z) = node . values + delta_coef * delta + sigma_coef . coupling
  struct Functional {
    Eigen::RowVectorXcd node;
    cplx delta_coef = 0.0;
    Eigen::RowVectorXcd sigma_coef;
  };
  static Functional functional(const KernelOp& K, const std::vector<ExtZero>& zeros, cplx z, int depth = 0);

private:
  friend FredholmSolution solve_extended(std::shared_ptr<const KernelOp>, const std::vector<ExtZero>&, Rhs,
                                         const SolveOptions&);
  std::shared_ptr<const KernelOp> K_;
  std::vector<ExtZero> zeros_;
  int delta_ = 1;
  Eigen::VectorXcd psi_, sig_;
  double residual_ = 0.0, smin_ = 0.0, stol_ = 0.0;
};

FredholmSolution solve(std::shared_ptr<const KernelOp> K, Rhs rhs = Rhs::Model, const SolveOptions& opt = {});
FredholmSolution solve_extended(std::shared_ptr<const KernelOp> K, const std::vector<ExtZero>& zeros,
                                Rhs rhs = Rhs::Model, const SolveOptions& opt = {});

// Fixed-point iteration psi <- m + K psi in the weighted norm; for cross-checks.
Eigen::VectorXcd neumann_iterate(const KernelOp& K, int max_iter, double tol, int* iterations = nullptr);

}  // namespace monodromize
