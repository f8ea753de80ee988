#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "monodromize/monodromy.hpp"

using namespace monodromize;

namespace {

const double H = std::sqrt(2.0);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

ReducedProblem harper_reduced(double lam, cplx E) {
  MatrixTrigPoly M(TrigPoly::constant(2.0 * E) + TrigPoly::cos_term(1, -2.0 * lam), TrigPoly::constant(-1.0),
                   TrigPoly::constant(1.0), TrigPoly());
  ReduceOptions ro;
  ro.phi_plus = I * std::log(lam) - PI;
  ro.phi_minus = -I * std::log(lam) - PI;
  return reduce(M, H, ro);
}

ReducedProblem hzero_reduced(double lam, cplx s, cplx t) {
  cplx a = lam * (1.0 - s * s - t * t) / (s * t);
  MatrixTrigPoly M(TrigPoly::constant(a) + TrigPoly::cos_term(1, -2.0 * lam),
                   TrigPoly(std::map<int, cplx>{{0, s}, {-1, t}}), TrigPoly(std::map<int, cplx>{{0, -s}, {1, -t}}),
                   TrigPoly::constant(s * t / lam));
  ReduceOptions ro;
  ro.phi_plus = I * std::log(lam) - PI - H / 2;
  ro.phi_minus = -I * std::log(lam) - PI;
  return reduce(M, H, ro);
}

struct Pair {
  ReducedProblem R;
  std::map<Kind, MinimalSolution> s;
  const MinimalSolution& operator[](Kind k) {
    auto it = s.find(k);
    if (it == s.end()) it = s.emplace(k, assemble_minimal(R, k)).first;
    return it->second;
  }
};

Pair& harper_pair() {
  static Pair p{harper_reduced(1.0, 0.1), {}};
  return p;
}

const MonodromyResult& harper_result() {
  static MonodromyResult r = monodromy_matrix(harper_pair()[Kind::D], harper_pair()[Kind::B]);
  return r;
}

void check_monodromy_invariants(const MonodromyResult& r) {
  CHECK(r.det_residual < 1e-7);
  CHECK(r.det_poly_residual < 1e-6);
  CHECK(r.periodicity_residual < 1e-7);
  CHECK(r.periodicity_independent >= 2);
  CHECK(r.fit_residual < 1e-6);
  CHECK(r.tail(r.n) < 1e-5);
  CHECK(r.w_spread < 1e-5);
}

}  // namespace

TEST_CASE("wronskian is antisymmetric") {
  PointSampler p = [](cplx z) { return Eigen::Vector2cd(std::sin(z), std::exp(z)); };
  PointSampler q = [](cplx z) { return Eigen::Vector2cd(z, 1.0 + z * z); };
  for (cplx z : {cplx(0.3, 0.1), cplx(-1.0, 2.0)}) {
    CHECK(wronskian(p, p, z) == 0.0);
    CHECK(std::abs(wronskian(p, q, z) + wronskian(q, p, z)) < 1e-15);
  }
}

TEST_CASE("wronskian of the Bloch pair f is v+/b+") {
  ReducedProblem R = harper_reduced(1.25, 0.1);
  auto bases = canonical_bases(R.M, H, R.phi_plus, R.phi_minus);
  const BlochBasis& f = *bases.f;
  PointSampler f1 = [&](cplx z) { return f(1, z); }, f2 = [&](cplx z) { return f(2, z); };
  // v = a here, so v+ = -lambda and b+ = -1
  for (cplx z : {cplx(0.3, 14.0), cplx(2.0, 18.0)}) CHECK(rel(wronskian(f1, f2, z), cplx(1.25)) < 1e-9);
}

TEST_CASE("wronskian of psi_D and psi_B is independent of z") {
  Pair& p = harper_pair();
  cplx w0 = wronskian(p[Kind::D], p[Kind::B], cplx(0.1, 0.0));
  double spread = 0.0;
  for (int k = 0; k < 20; ++k) {
    cplx z(-2.5 + 0.27 * k, -3.0 + 0.31 * k);
    spread = std::max(spread, rel(wronskian(p[Kind::D], p[Kind::B], z), w0));
  }
  MESSAGE("wronskian spread " << spread);
  CHECK(spread < 1e-5);
}

TEST_CASE("Harper monodromy: det, periodicity, order bound, cosine coefficient") {
  const MonodromyResult& r = harper_result();
  check_monodromy_invariants(r);
  MESSAGE("det " << r.det_residual << " periodicity " << r.periodicity_residual << " (" << r.periodicity_independent << " independent)" << " fit " << r.fit_residual
                 << " tail " << r.tail(1));
  // lambda = 1: lambda_1 = 1
  CHECK(rel(r.harmonic(0, 1), cplx(-1.0)) < 1e-4);
  CHECK(rel(r.harmonic(0, -1), cplx(-1.0)) < 1e-4);
  // reproduces the samples at the sampling points
  for (size_t k = 0; k < r.z.size(); k += 7) CHECK((r(r.z[k]) - r.raw[k]).norm() < 1e-10 * r.scale);
}

TEST_CASE("Harper monodromy: leading coefficients from the asymptotic coefficients") {
  Pair& p = harper_pair();
  const MonodromyResult& r = harper_result();
  auto bases = canonical_bases(p.R.M, H, p.R.phi_plus, p.R.phi_minus);
  SlotCoeffs cd = min_asymp_coeffs(p[Kind::D], bases), cb = min_asymp_coeffs(p[Kind::B], bases);
  const cplx alpha2 = bases.f->multiplier_closed(2), beta1 = bases.g->multiplier_closed(1);
  StructureReport s = structure_check(r, 1, alpha2, beta1, cd, cb);
  CHECK(s.omega_member);
  REQUIRE(s.comparisons.size() == 8);
  for (const Comparison& c : s.comparisons) {
    CAPTURE(c.name);
    CAPTURE(c.fitted);
    CAPTURE(c.predicted);
    CHECK_FALSE(c.skipped);
    CHECK(c.rel_error < 1e-3);
  }
  // the wronskian through the asymptotic coefficients, computed two ways
  const cplx wf = bases.f->det_target(), wg = bases.g->det_target();
  CHECK(rel(wg * cd.C * cb.D, r.w) < 1e-4);
  CHECK(rel(-wf * cb.A * cd.B, r.w) < 1e-4);
}

TEST_CASE("swapping the pair conjugates the monodromy by the swap matrix") {
  Pair& p = harper_pair();
  const MonodromyResult& r = harper_result();
  MonodromyResult q = natural_pair_monodromy(p[Kind::B], p[Kind::D]);
  CHECK(rel(q.w, -r.w) < 1e-12);
  const int perm[4] = {3, 2, 1, 0};
  for (int e = 0; e < 4; ++e)
    for (int l = -2; l <= 2; ++l) CHECK(std::abs(q.harmonic(e, l) - r.harmonic(perm[e], l)) < 1e-12 * r.scale);
}

TEST_CASE("natural pair (psi_A, psi_C): harmonics confined to |l| <= 1") {
  Pair& p = harper_pair();
  MonodromyResult r = natural_pair_monodromy(p[Kind::A], p[Kind::C]);
  check_monodromy_invariants(r);
  StructureReport s = entry_orders(r, 1);
  CHECK(s.orders_bounded);
  CHECK(s.tail < 1e-5);
}

TEST_CASE("degenerate and mismatched pairs are rejected") {
  Pair& p = harper_pair();
  try {
    natural_pair_monodromy(p[Kind::D], p[Kind::D].scaled(cplx(0.5, 2.0)));
    FAIL("expected DegeneratePair");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegeneratePair);
  }
  try {
    monodromy_matrix(p[Kind::B], p[Kind::D]);
    FAIL("expected BasisMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BasisMismatch);
  }
  try {
    canonical_factorization(p[Kind::D], p[Kind::B]);
    FAIL("expected Unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unsupported);
  }
}

TEST_CASE("matrix with zeros of b: the monodromy lies in Omega(1)") {
  Pair p{hzero_reduced(1.0, 0.7, 0.5), {}};
  MonodromyResult r = monodromy_matrix(p[Kind::D], p[Kind::B]);
  check_monodromy_invariants(r);
  auto bases = canonical_bases(p.R.M, H, p.R.phi_plus, p.R.phi_minus);
  SlotCoeffs cd = min_asymp_coeffs(p[Kind::D], bases), cb = min_asymp_coeffs(p[Kind::B], bases);
  StructureReport s =
      structure_check(r, 1, bases.f->multiplier_closed(2), bases.g->multiplier_closed(1), cd, cb);
  CHECK(s.omega_member);
  for (const Comparison& c : s.comparisons) {
    CAPTURE(c.name);
    if (!c.skipped) CHECK(c.rel_error < 1e-3);
  }
}
