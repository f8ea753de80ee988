#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>
#include <tuple>

#include "monodromize/harper.hpp"

using namespace monodromize;

namespace {

const double H = std::sqrt(2.0);
const double GOLDEN = PI * (std::sqrt(5.0) - 1.0);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

const HarperMonodromy& cached_monodromy(double lam, double E, double h) {
  static std::map<std::tuple<double, double, double>, HarperMonodromy> cache;
  auto key = std::make_tuple(lam, E, h);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, harper_monodromy(lam, E, h)).first;
  return it->second;
}

const HarperPair& cached_pair() {
  static HarperPair p = harper_pair(1.0, 0.1, H);
  return p;
}

Eigen::Matrix2cd swap_matrix() {
  Eigen::Matrix2cd s;
  s << 0, 1, 1, 0;
  return s;
}

}  // namespace

TEST_CASE("Harper matrix") {
  MatrixTrigPoly M = harper_matrix(1.0, 0.0);
  CHECK(std::abs(M.a.coeff(1) + 1.0) < 1e-15);
  CHECK(std::abs(M.a.coeff(-1) + 1.0) < 1e-15);
  CHECK(std::abs(M.a.coeff(0)) == 0.0);
  TrigPoly det = harper_matrix(1.3, cplx(0.2, 0.1)).det();
  CHECK(det.coeffs().size() == 1);
  CHECK(std::abs(det.coeff(0) - 1.0) < 1e-15);
  CHECK(omega_classify(harper_matrix(0.8, 0.3), 1).member);
}

TEST_CASE("family matrices: det, symmetry, degenerate charts") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  MatrixTrigPoly M = hfamily_matrix(HarperPoint::surface(1.3, cplx(0.7, 0.2), cplx(-0.4, 0.5), H));
  const Eigen::Matrix2cd S = swap_matrix();
  for (int k = 0; k < 20; ++k) {
    cplx z(u(rng), u(rng) / 2);
    CHECK(std::abs(M(z).determinant() - 1.0) < 1e-12);
    // M(2 pi - z) = sigma M(z)^{-1} sigma
    CHECK((M(2 * PI - z) - S * M(z).inverse() * S).norm() < 1e-12 * M(z).norm());
  }
  MatrixTrigPoly Ms = hfamily_matrix(HarperPoint::surface(1.0, 0.6, 0.6, H));
  for (cplx z : {cplx(0.3, 0.2), cplx(-1.0, 1.5)}) CHECK((Ms(2 * PI - z) - S * Ms(z).inverse() * S).norm() < 1e-12);

  MatrixTrigPoly h0 = hfamily_matrix(HarperPoint::degenerate(HChart::h0_plus, 1.0, 0.0, H));
  for (cplx z : {cplx(0.3, 0.2), cplx(2.0, -1.0)}) {
    Eigen::Matrix2cd e;
    e << -2.0 * std::cos(z), 1.0, -1.0, 0.0;
    CHECK((h0(z) - e).norm() < 1e-14);
  }
  MatrixTrigPoly h1 = hfamily_matrix(HarperPoint::degenerate(HChart::h1_minus, 1.0, 0.5, H));
  cplx z(0.4, 0.3);
  CHECK(std::abs(h1(z)(0, 1) + std::exp(-I * z)) < 1e-14);
  CHECK(std::abs(h1(z)(1, 0) - std::exp(I * z)) < 1e-14);
  CHECK(omega_classify(M, 1).member);

  HarperPoint bad = HarperPoint::surface(1.0, 0.0, 0.5, H);
  try {
    hfamily_matrix(bad);
    FAIL("expected ChartViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ChartViolation);
  }
  CHECK(HarperPoint::harper(1.0, 0.1, H).chart == HChart::h0_minus);
  CHECK((hfamily_matrix(HarperPoint::harper(1.0, 0.1, H))(z) - harper_matrix(1.0, 0.1)(z)).norm() < 1e-15);
}

TEST_CASE("symmetric pair: normalization and the relations between psi_D and psi_B") {
  const HarperPair& p = cached_pair();
  CHECK(std::abs(p.cd.C - 1.0) < 1e-14);
  CHECK(std::abs(p.cb.A + 1.0) < 1e-5);
  CHECK(std::abs(p.cb.D + p.cd.B) < 1e-5 * std::abs(p.cd.B));
  CHECK(std::abs(p.cb.C + p.cd.A) < 1e-5 * std::abs(p.cd.A));
  CHECK(std::abs(p.cb.B + p.cd.D * std::exp(-4.0 * PI * PI * I / H)) < 1e-5 * std::abs(p.cd.D));
  for (double r : p.relations) CHECK(r < 1e-5);
}

TEST_CASE("psi_B built by the reflection solves the equation") {
  const HarperPair& p = cached_pair();
  const MinimalSolution& b = p.b;
  const double sh = b.max_shift();
  double worst = 0.0;
  int nontrivial = 0, total = 0;
  for (double x = -2 * PI; x <= 2 * PI; x += PI / 6)
    for (double y = -6.0; y <= 6.0; y += 1.5) {
      cplx z(x, y);
      Eigen::Vector2cd l = b.eval(z + H, sh), r = p.M(z) * b.eval(z, -sh);
      worst = std::max(worst, (l - r).norm() / std::max(l.norm(), r.norm()));
      ++total;
      if (std::abs(b.base_point(z + H, sh) - b.base_point(z, -sh)) > 1e-9) ++nontrivial;
    }
  MESSAGE("psi_B residual " << worst << ", " << nontrivial << " of " << total << " across base strips");
  CHECK(worst < 1e-6);
  CHECK(nontrivial > total / 5);
}

TEST_CASE("Harper monodromy shape over lambda, E and h") {
  for (double h : {H, GOLDEN})
    for (double lam : {0.8, 1.0, 1.25})
      for (double E : {0.0, 0.1, 0.3}) {
        CAPTURE(h);
        CAPTURE(lam);
        CAPTURE(E);
        const HarperMonodromy& m = cached_monodromy(lam, E, h);
        const double lam1 = std::pow(lam, 2 * PI / h);
        CHECK(m.lambda1 == lam1);
        CHECK(rel(m.M.harmonic(0, 1), cplx(-lam1)) < 1e-4);
        CHECK(rel(m.M.harmonic(0, -1), cplx(-lam1)) < 1e-4);
        for (int l : {-2, -1, 1, 2}) CHECK(std::abs(m.M.harmonic(3, l)) < 1e-5 * std::abs(m.M.harmonic(3, 0)));
        CHECK(std::abs(m.M.harmonic(3, 0) - m.s * m.t / lam1) < 1e-4 * lam1);
        CHECK(m.shape.worst < 1e-4);
        CHECK(m.shape.a_identity < 1e-4);
        CHECK(m.shape.symmetry < 1e-4);
        CHECK(m.M.det_residual < 1e-7);
        CHECK(m.M.periodicity_residual < 1e-7);
      }
}

TEST_CASE("step map") {
  CHECK(step_map(GOLDEN) == GOLDEN);
  double h = GOLDEN;
  for (int k = 0; k < 5; ++k) h = step_map(h);
  CHECK(h == GOLDEN);
  CHECK(step_map(H) == doctest::Approx(2 * PI * (2 * PI / H - 4)).epsilon(1e-14));
  for (double r : {2 * PI / 3, PI, 2 * PI / 7}) {
    try {
      step_map(r);
      FAIL("expected RationalTermination");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RationalTermination);
    }
  }
}

TEST_CASE("renormalization step from the Harper matrix: lambda law and both projections") {
  for (double lam : {1.0, 1.25}) {
    CAPTURE(lam);
    RenormStep st = renorm_step(HarperPoint::harper(lam, 0.1, H));
    CHECK(st.next.lambda == std::pow(lam, 2 * PI / H));
    if (lam == 1.0) CHECK(st.next.lambda == 1.0);
    CHECK(st.next.chart == HChart::H0);
    CHECK(st.next.h == step_map(H));
    CHECK(st.next.j == 1);
    CHECK(st.formula_residual < 1e-4);
    CHECK(st.shape.worst < 1e-4);
  }
}

TEST_CASE("renormalization step on the surface: closed-form projection against extraction") {
  RenormStep st = renorm_step(HarperPoint::surface(1.0, 0.7, 0.5, H));
  MESSAGE("s1 " << st.s_fit << " vs " << st.s_formula << ", t1 " << st.t_fit << " vs " << st.t_formula);
  CHECK(st.formula_residual < 1e-4);
  CHECK(st.shape.worst < 1e-4);
  CHECK(st.shape.symmetry < 1e-4);
  CHECK(st.det_residual < 1e-7);
}

TEST_CASE("renormalization step on a degenerate chart") {
  RenormStep p = renorm_step(HarperPoint::degenerate(HChart::h0_plus, 1.0, 0.2, H));
  RenormStep m = renorm_step(HarperPoint::degenerate(HChart::h0_minus, 1.0, 0.2, H));
  // conjugation by diag(1, -1) maps h0- to h0+ and flips the sign of psi_B
  CHECK(std::abs(p.s_fit + m.s_fit) < 1e-8);
  CHECK(std::abs(p.t_fit + m.t_fit) < 1e-8);
  CHECK(p.shape.worst < 1e-4);
  RenormStep q = renorm_step(HarperPoint::degenerate(HChart::h1_plus, 1.25, 0.2, H));
  CHECK(q.shape.worst < 1e-4);
  CHECK(q.next.chart == HChart::H0);
}

TEST_CASE("renormalization trajectories") {
  SUBCASE("two steps at the golden step") {
    Trajectory tr = renorm_iterate(HarperPoint::harper(1.0, 0.0, GOLDEN), 2);
    CHECK(tr.termination.empty());
    REQUIRE(tr.points.size() == 3);
    for (size_t k = 1; k < tr.points.size(); ++k) {
      const TrajectoryStep& s = tr.points[k];
      MESSAGE("step " << k << ": s " << s.point.s << " t " << s.point.t << " shape " << s.shape_residual << " det "
                      << s.det_residual << " formula " << s.formula_residual << " (" << s.seconds << " s)");
      CHECK(s.point.h == GOLDEN);
      CHECK(s.point.lambda == 1.0);
      CHECK(s.point.j == int(k));
      CHECK(s.shape_residual < 1e-4);
      CHECK(s.det_residual < 1e-7);
      CHECK(s.formula_residual < 1e-4);
    }
  }
  SUBCASE("rational steps end the procedure") {
    Trajectory tr = renorm_iterate(HarperPoint::harper(1.0, 0.1, 2 * PI / 3), 3);
    CHECK(tr.points.size() == 1);
    CHECK(tr.termination.rfind("RationalTermination", 0) == 0);
    // 2 pi / h = 11/10: one step to h' = pi/5, then 2 pi / h' = 10 ends it
    Trajectory t2 = renorm_iterate(HarperPoint::harper(1.0, 0.1, 20 * PI / 11), 4);
    REQUIRE(t2.points.size() == 2);
    CHECK(t2.points[1].point.h == doctest::Approx(PI / 5).epsilon(1e-13));
    CHECK(t2.points[1].shape_residual < 1e-4);
    CHECK(t2.termination.rfind("RationalTermination", 0) == 0);
    // 5 h = 4 pi: the homological equation meets a resonant harmonic
    Trajectory t3 = renorm_iterate(HarperPoint::harper(1.0, 0.1, 0.8 * PI), 4);
    CHECK(t3.points.size() == 1);
    CHECK(t3.termination.rfind("SmallDenominator", 0) == 0);
  }
}
