#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "monodromize/reduction.hpp"

namespace monodromize {

using PointSampler = std::function<Eigen::Vector2cd(cplx)>;

// det(psi(z), chi(z))
cplx wronskian(const PointSampler& psi, const PointSampler& chi, cplx z);
cplx wronskian(const MinimalSolution& psi, const MinimalSolution& chi, cplx z);

struct MonodromyOptions {
  int samples = 64;       // per h-period, on the line Im z = y
  double y = 0.0;
  int checks = 8;         // off-grid points for the fit and periodicity residuals
  double pair_tol = 1e-8;  // |w| relative to |psi_X| |psi_Y|
  double harmonic_tol = 1e-6;
};

// Entries are indexed 0..3 as 11, 12, 21, 22 and are trigonometric polynomials in z1 = 2 pi z / h.
struct MonodromyResult {
  double h = 1.0;
  int n = 1;
  Kind first = Kind::D, second = Kind::B;
  cplx w;
  double w_spread = 0.0;
  std::vector<cplx> z;                              // sampling points
  std::vector<Eigen::Matrix2cd> raw;                // sampled matrices at z
  // unitary DFT coefficients, harmonic l stored at l + samples/2
  std::array<std::vector<cplx>, 4> harmonics;
  std::array<TrigPoly, 4> entries;  // harmonics above harmonic_tol times the largest one
  double fit_residual = 0.0;
  double periodicity_residual = 0.0;
  int periodicity_independent = 0;  // check pairs whose values come from different base points
  double det_residual = 0.0;       // samples
  double det_poly_residual = 0.0;  // non-constant harmonics of det of the fitted entries
  double scale = 0.0;              // largest harmonic modulus

  cplx harmonic(int entry, int l) const;
  // largest |harmonic| with |l| > order, relative to scale
  double tail(int order) const;
  Eigen::Matrix2cd operator()(cplx z) const;  // fitted matrix at z
};

// Wronskian quotients for the pair (psi_X, psi_Y):
// M11 = {X(z+2pi), Y}/w, M12 = {X, X(z+2pi)}/w, M21 = {Y(z+2pi), Y}/w, M22 = {X, Y(z+2pi)}/w.
// DegeneratePair when w vanishes.
MonodromyResult natural_pair_monodromy(const MinimalSolution& x, const MinimalSolution& y,
                                       const MonodromyOptions& opt = {});

// The pair (psi_D, psi_B); BasisMismatch if the kinds or parameters differ.
MonodromyResult monodromy_matrix(const MinimalSolution& d, const MinimalSolution& b, const MonodromyOptions& opt = {});

struct Comparison {
  std::string name;
  int entry = 0, harmonic = 0;
  cplx fitted, predicted;
  double rel_error = 0.0;
  bool skipped = false;
};

struct StructureReport {
  std::vector<Comparison> comparisons;
  bool omega_member = false;   // entry orders of Omega(n)
  bool orders_bounded = false;  // -n <= n+- <= n for every entry
  double tail = 0.0;           // harmonics beyond n, relative
  double worst = 0.0;          // largest non-skipped comparison error
};

// Asymptotic coefficients of psi_D and psi_B (first slots D_D and B_B), and the
// leading Bloch multiplier constants alpha2^0 of f_2 and beta1^0 of g_1.
StructureReport structure_check(const MonodromyResult& r, int n, cplx alpha2, cplx beta1, const SlotCoeffs& cd,
                                const SlotCoeffs& cb, double skip_tol = 1e-6);

// Orders of the fitted entries: Omega(n) membership and the relaxed bound.
StructureReport entry_orders(const MonodromyResult& r, int n);

// Factorization through shifted canonical bases; always throws Unsupported.
void canonical_factorization(const MinimalSolution& d, const MinimalSolution& b);

// Worker count for sampling: MONODROMIZE_THREADS if set, else the hardware count.
unsigned max_threads();

}  // namespace monodromize
