#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "monodromize/sigma.hpp"

namespace monodromize {

// m(z+h) + m(z-h) + 2 e^xi cos z m(z) = 0
struct ModelParams {
  cplx xi;
  double h;
  cplx p0() const { return I * xi + h / 2.0; }
  cplx lambda() const { return std::exp(xi); }
};

struct ModelCoeffs {
  cplx a0, b0, c0, d0;
};

// Bent contour: up the imaginary axis between -i|Re xi| and i|Re xi|, then
// along e^{-i pi/4} R at both ends.
struct ModelContour {
  std::vector<cplx> knots;
  double min_pole_distance = 0.0;  // horizontal
  cplx nearest_pole;
  bool deformation_justified = false;  // horizontal pole distance exceeds h
};
ModelContour model_contour(const ModelParams& P);

struct ModelOptions {
  double line_spacing = 0.25;  // spacing of the integration lines in Re p + Im p
  double panel = 0.5;
  double clearance = 0.35;
  double max_offset = 2.0;  // distance of the integration line from the saddle
  double tol = 1e-16;
  double sigma_zero_guard = 1e-6;
  // beyond this |Im z| the two-exponential asymptotics replace the integral (0 disables)
  double asym_height = 20.0;
  double asym_tol = 1e-12;  // agreement demanded at the switch height
};

class ModelSolution {
public:
  ModelSolution(ModelParams P, std::shared_ptr<const SigmaEngine> sigma = nullptr, ModelOptions opt = {});

  const ModelParams& params() const { return P_; }
  const SigmaEngine& sigma() const { return *sigma_; }
  std::shared_ptr<const SigmaEngine> sigma_ptr() const { return sigma_; }

  cplx vker(cplx p) const;
  // Residue of v at -p0 + pi + h + 2 pi j + 2 h k; the mirrored pole has the opposite residue.
  cplx vker_residue(int j, int k) const;

  cplx m(cplx z) const { return eval(z)[0]; }
  cplx m_prime(cplx z) const { return eval(z)[1]; }
  std::array<cplx, 2> eval(cplx z) const;

  ModelCoeffs coeffs() const;
  double envelope(cplx z) const;
  // integral representation regardless of height
  std::array<cplx, 2> eval_integral(cplx z) const;
  // two-exponential asymptotics with their derivative
  std::array<cplx, 2> eval_asymptotic(cplx z) const;
  double asym_height() const { return asym_height_; }

private:
  struct Pole {
    double offset;  // 2 pi j + 2 h k
    int j, k;
  };
  // poles closer than a fixed gap are treated together through a circle around them
  struct Cluster {
    size_t first, last;
    double center, radius;
  };
  struct Line {
    cplx base;
    std::unordered_map<long, std::array<cplx, 16>> panels;
  };
  std::array<cplx, 2> J(cplx c) const;
  double line_clearance(double s, double tlo, double thi) const;
  cplx residue_at(size_t idx) const;
  // 2 pi i times the residue sum of G v and of (i/2h)(p - c) G v over a cluster, G = exp(-i (p - c)^2 / 4h)
  std::array<cplx, 2> cluster_residues(size_t ci, cplx c, bool mirrored) const;
  const std::array<cplx, 16>& panel_values(Line& ln, long k) const;

  ModelParams P_;
  std::shared_ptr<const SigmaEngine> sigma_;
  ModelOptions opt_;
  ModelCoeffs coeffs_;
  double asym_height_ = 0.0;
  cplx q0_;  // -p0 + pi + h
  std::vector<Pole> poles_;  // sorted by offset
  std::vector<Cluster> clusters_;
  mutable std::map<std::pair<size_t, bool>, std::vector<cplx>> circle_cache_;
  mutable std::vector<cplx> res_cache_;
  mutable std::vector<bool> res_known_;
  mutable std::map<long, Line> lines_;
  mutable std::mutex mu_;
};

// cot x + i without overflow or cancellation at large |Im x|
cplx cot_plus_i(cplx x);

// m together with its partner conj(m(conj z, conj xi)).
class ModelPair {
public:
  explicit ModelPair(ModelParams P, ModelOptions opt = {});

  const ModelParams& params() const { return m_->params(); }
  const ModelSolution& m_solution() const { return *m_; }
  // the solution at conj(xi); mt(z) = conj of its value at conj(z)
  const ModelSolution& partner_solution() const { return *mc_; }
  cplx m(cplx z) const { return m_->m(z); }
  cplx mt(cplx z) const;
  std::array<cplx, 2> m_eval(cplx z) const { return m_->eval(z); }
  std::array<cplx, 2> mt_eval(cplx z) const;

  cplx wronskian_closed() const;
  // Sampled {m, mt}; NonConstant when the spread is above rel_tol.
  cplx wronskian_sampled(double rel_tol = 1e-6) const;

  // theta(z, z0)[m(z) mt(z0+h) - m(z0+h) mt(z)] / W, simple pole at z0 with residue h/pi
  cplx pole_eval(cplx z, cplx z0) const;

private:
  std::shared_ptr<ModelSolution> m_, mc_;
};

}  // namespace monodromize
