#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "monodromize/fredholm.hpp"

using namespace monodromize;

namespace {

const double H = std::sqrt(2.0);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

std::shared_ptr<const ModelPair> model0() {
  static auto mp = std::make_shared<const ModelPair>(ModelParams{0.0, H});
  return mp;
}

Contour harper_contour(double density = 0.5, std::vector<Forbidden> f = {}) {
  ContourOptions o;
  o.T = truncation_height(1.0);
  o.h = H;
  o.density = density;
  return build_contour(PI, 0.0, f, o);
}

std::shared_ptr<const KernelOp> harper_kernel(double E, double density = 0.5, std::vector<Forbidden> f = {}) {
  return std::make_shared<const KernelOp>(model0(), [E](cplx) { return cplx(2 * E); }, harper_contour(density, f),
                                          1.0);
}

// lambda = 1, E = 0.1 at two grid densities, built once
const FredholmSolution& harper(int level) {
  static std::unique_ptr<FredholmSolution> s[2];
  if (!s[level]) s[level] = std::make_unique<FredholmSolution>(solve(harper_kernel(0.1, level ? 1.0 : 0.5)));
  return *s[level];
}

double eq_residual(const FredholmSolution& S, cplx z, cplx w) {
  cplx r = S(z + H) + S(z - H) + (2.0 * std::cos(z) - w) * S(z);
  return std::abs(r) / std::max({std::abs(S(z + H)), std::abs(S(z - H)), std::abs(S(z))});
}

std::array<cplx, 2> fit_two(const std::function<cplx(cplx)>& f, const std::function<cplx(cplx)>& e1,
                            const std::function<cplx(cplx)>& e2, double x0, double y) {
  Eigen::MatrixXcd A(12, 2);
  Eigen::VectorXcd b(12);
  for (int k = 0; k < 12; ++k) {
    cplx z(x0 - 1.1 + 0.2 * k, y);
    double n = std::abs(e1(z)) + std::abs(e2(z));
    A(k, 0) = e1(z) / n;
    A(k, 1) = e2(z) / n;
    b(k) = f(z) / n;
  }
  Eigen::VectorXcd s = A.colPivHouseholderQr().solve(b);
  return {s(0), s(1)};
}

}  // namespace

TEST_CASE("contour without forbidden points") {
  Contour c = harper_contour();
  REQUIRE(c.knots.size() == 4);
  CHECK(c.knots.front() == cplx(0.0, -c.T));
  CHECK(c.knots.back() == cplx(PI, c.T));
  CHECK(c.min_angle() > 0.2);
  for (size_t i = 1; i < c.knots.size(); ++i) CHECK(c.knots[i].imag() > c.knots[i - 1].imag());
  cplx len = 0.0;
  for (cplx w : c.weights) len += w;
  CHECK(std::abs(len - (c.knots.back() - c.knots.front())) < 1e-12);
  for (cplx p : {cplx(5.0, 0.3), cplx(-1.0, 2.0), cplx(0.2, 0.1)}) {
    cplx q = 0.0;
    for (size_t j = 0; j < c.size(); ++j) q += c.weights[j] / (c.nodes[j] - p);
    CHECK(std::abs(q - c.log_integral(p)) < 1e-9);
  }
  // on the curve: one-sided limits differ by 2 pi i
  cplx on(c.x_at(0.4), 0.4);
  CHECK(std::abs(c.log_integral(on, -1) - c.log_integral(on, 1) - 2.0 * PI * I) < 1e-12);
  CHECK(std::abs(c.log_integral(on, -1) - c.log_integral(on - 1e-9)) < 1e-8);
  CHECK(c.offset(cplx(PI + 1.0, 10.0)) == doctest::Approx(1.0));
  CHECK(c.offset(cplx(-0.5, -10.0)) == doctest::Approx(-0.5));
}

TEST_CASE("detours keep the guard distance") {
  cplx p(PI / 2, 0.2);
  for (int side : {-1, 0, 1}) {
    ContourOptions o;
    o.h = H;
    Contour c = build_contour(PI, 0.0, {{p, 0.5, side}}, o);
    double dmin = INFINITY;
    for (int k = 0; k <= 40000; ++k) {
      double y = -c.T + 2 * c.T * k / 40000.0;
      dmin = std::min(dmin, std::abs(p - cplx(c.x_at(y), y)));
    }
    CHECK(dmin >= 0.5);
    if (side != 0) CHECK((side < 0 ? c.offset(p) < 0 : c.offset(p) > 0));
    CHECK(c.min_angle() > 0.2);
    CHECK(c.x_at(10.0) == PI);
    CHECK(c.x_at(-10.0) == 0.0);
  }
}

TEST_CASE("blockaded passage is infeasible") {
  ContourOptions o;
  o.h = H;
  std::vector<Forbidden> f = {{cplx(1.0, 0.0), 1.0, -1}, {cplx(1.5, 0.0), 1.0, 1}};
  CHECK_THROWS_AS(build_contour(PI, 0.0, f, o), Error);
  try {
    build_contour(PI, 0.0, f, o);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Infeasible);
  }
  CHECK_THROWS_AS(build_contour(PI, 0.0, {{cplx(1.0, 0.0), 0.0, 0}}, o), Error);
}

TEST_CASE("zero perturbation returns the model solution") {
  auto K = std::make_shared<const KernelOp>(model0(), [](cplx) { return cplx(0.0); }, harper_contour(), 1.0);
  CHECK(K->trivial());
  CHECK(K->matrix().norm() == 0.0);
  auto S = solve(K);
  CHECK(S.delta() == 1);
  for (size_t j = 0; j < K->size(); j += 37) CHECK(S.values()(j) == model0()->m(K->contour().nodes[j]));
  auto c = S.asymptotics();
  CHECK(c.A == cplx(1.0));
  CHECK(c.B == cplx(0.0));
  CHECK(c.C == cplx(1.0));
  CHECK(c.D == cplx(0.0));
  auto m0 = model0()->m_solution().coeffs();
  CHECK(c.a == m0.a0);
  CHECK(c.b == m0.b0);
  CHECK(c.c == m0.c0);
  CHECK(c.d == m0.d0);
  cplx z(1.0 + 0.5 * H, 0.4);
  CHECK(rel(S(z), model0()->m(z)) < 1e-14);
}

TEST_CASE("Harper solve: residual, Neumann series, refinement") {
  const auto& S = harper(0);
  const auto& S2 = harper(1);
  CHECK(S.delta() == 1);
  CHECK(S.sigma_min() > S.sing_tol());
  CHECK(S.residual() < 1e-9);
  CHECK(S2.kernel().size() > 1.8 * S.kernel().size());

  // direct residual on the grid, recomputed from the matrix
  const KernelOp& K = S.kernel();
  Eigen::VectorXcd m(K.size());
  for (size_t j = 0; j < K.size(); ++j) m(j) = K.m_node(j)[0];
  Eigen::VectorXcd r = S.values() - m - K.matrix() * S.values();
  Eigen::VectorXcd rw = r.cwiseProduct(K.sqrt_weight().cast<cplx>());
  Eigen::VectorXcd pw = S.values().cwiseProduct(K.sqrt_weight().cast<cplx>());
  CHECK(rw.norm() / pw.norm() < 1e-9);

  int iters = 0;
  Eigen::VectorXcd nv = neumann_iterate(K, 200, 1e-14, &iters);
  CHECK(iters < 200);
  Eigen::VectorXcd dw = (nv - S.values()).cwiseProduct(K.sqrt_weight().cast<cplx>());
  CHECK(dw.norm() / pw.norm() < 1e-8);

  for (cplx z : {cplx(0.3, -2.0), cplx(1.7, 0.1), cplx(PI, 3.0), cplx(2.0, 0.5), cplx(0.0, -6.0)})
    CHECK(rel(S(z), S2(z)) < 1e-6);

  // sampled kernel bound constant: finite and stable under refinement
  CHECK(std::isfinite(K.bound_constant()));
  CHECK(K.bound_constant() / S2.kernel().bound_constant() == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("continued solution satisfies the perturbed equation") {
  const auto& S = harper(0);
  const Contour& c = S.kernel().contour();
  for (double y : {-3.0, -0.7, 0.0, 0.9, 4.0}) {
    double x = c.x_at(y);
    for (double off : {-0.5, 0.0, 0.5}) CHECK(eq_residual(S, cplx(x + off * H, y), 0.2) < 1e-6);
  }
  // on the contour between nodes: the Nystrom interpolant against the finer grid
  cplx zc(c.x_at(0.77), 0.77);
  CHECK(rel(S(zc), harper(1)(zc)) < 1e-8);
  // a node is returned as is
  CHECK(S(c.nodes[100]) == S.values()(100));
  // two steps away is refused
  CHECK_THROWS_AS(S(cplx(c.x_at(1.0) + 2.01 * H, 1.0)), Error);
}

TEST_CASE("residue-corrected continuation agrees with a deformed contour") {
  const auto& S = harper(0);
  const Contour& c = S.kernel().contour();
  // bulge the contour right, then left, around y = 0.3
  double x0 = c.x_at(0.3);
  for (int dir : {1, -1}) {
    auto Kb = harper_kernel(0.1, 0.5, {{cplx(x0 + 0.2 * dir, 0.3), 1.3 * H, -dir}});
    auto Sb = solve(Kb);
    for (double frac : {1.2, 1.5, 1.8}) {
      cplx z(x0 + dir * frac * H, 0.3);
      CHECK(std::abs(Kb->contour().offset(z)) < H);
      CHECK(rel(S(z), Sb(z)) < 1e-7);
    }
  }
}

TEST_CASE("asymptotic coefficients of the Harper solution") {
  const auto& S = harper(0);
  auto c = S.asymptotics();
  CHECK(c.C == cplx(1.0));
  const ModelPair& mp = *model0();
  // the leading two-term forms with the extracted A, B, C, D
  for (double y : {11.0, 13.0}) {
    cplx zu(1.3, y), zl(0.4, -y);
    CHECK(rel(c.A * mp.m(zu) + c.B * mp.mt(zu), S(zu)) < 1e-5);
    cplx e = std::exp(-2.0 * PI * I * zl / H) * mp.mt(zl);
    CHECK(rel(c.C * mp.m(zl) + c.D * e, S(zl)) < 1e-5);
    // the D term is visible at this height: flipping its sign must fail
    CHECK(rel(c.C * mp.m(zl) - c.D * e, S(zl)) > 1e-4);
  }
  // two-exponential fit at Im z = +-13
  auto f = [&](cplx z) { return S(z); };
  auto q = [](cplx z) { return (z - PI) * (z - PI); };
  auto up1 = [&](cplx z) { return std::exp(I / (2 * H) * q(z) + I * z / 2.0); };
  auto up2 = [&](cplx z) { return std::exp(-I / (2 * H) * q(z) + I * z / 2.0); };
  auto dn1 = [&](cplx z) { return std::exp(I / (2 * H) * q(z) - I * z / 2.0); };
  auto dn2 = [&](cplx z) { return std::exp(-2.0 * PI * I * z / H - I / (2 * H) * q(z) - I * z / 2.0); };
  auto [a, b] = fit_two(f, up1, up2, PI, 13.0);
  auto [cc, d] = fit_two(f, dn1, dn2, 0.0, -13.0);
  CHECK(rel(a, c.a) < 1e-3);
  CHECK(rel(b, c.b) < 1e-3);
  CHECK(rel(cc, c.c) < 1e-3);
  CHECK(rel(d, c.d) < 1e-3);
}

TEST_CASE("homogeneous branch when 1 is an eigenvalue of K") {
  // scale a constant perturbation so that the discretized K has eigenvalue 1
  auto K0 = harper_kernel(0.5);
  const Eigen::VectorXd& sp = K0->sqrt_weight();
  Eigen::MatrixXcd Ks = sp.asDiagonal() * K0->matrix() * sp.cwiseInverse().asDiagonal();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ks, false);
  Eigen::Index k;
  es.eigenvalues().cwiseAbs().maxCoeff(&k);
  cplx mu = es.eigenvalues()(k);
  cplx w = 1.0 / mu;  // w0 = 1 for E = 0.5
  auto K = std::make_shared<const KernelOp>(model0(), [w](cplx) { return w; }, harper_contour(), 1.0);
  auto S = solve(K, Rhs::Model);
  CHECK(S.delta() == 0);
  CHECK(S.sigma_min() < S.sing_tol());
  CHECK(S.asymptotics().C == cplx(0.0));
  CHECK(S.residual() < 1e-8);
  auto S0 = solve(K, Rhs::Zero);
  CHECK(S0.delta() == 0);
  const Contour& c = K->contour();
  for (double y : {-1.0, 0.5, 2.0}) CHECK(eq_residual(S, cplx(c.x_at(y) + 0.3 * H, y), w) < 1e-6);
  // away from the eigenvalue the homogeneous equation has only the trivial solution
  CHECK_THROWS_AS(solve(harper_kernel(0.1), Rhs::Zero), Error);
}

TEST_CASE("extended operator") {
  const auto& S = harper(0);
  auto Kp = S.kernel_ptr();
  auto Se = solve_extended(Kp, {});
  CHECK(Se.values() == S.values());
  CHECK(Se.delta() == 1);

  const Contour& c = Kp->contour();
  cplx z0(c.x_at(0.2) - 0.6 * H, 0.2);
  cplx s(0.3, 0.1);
  auto Sx = solve_extended(Kp, {{z0, s}});
  CHECK(Sx.residual() < 1e-9);
  REQUIRE(Sx.coupling().size() == 1);
  cplx sig = Sx.coupling()(0);
  CHECK(rel(sig, Sx(z0 + H)) < 1e-8);
  // residue at z0 is (h/pi) s f(z0 + h)
  cplx res = 0.0;
  const int n = 64;
  double r = 0.1 * H;
  for (int k = 0; k < n; ++k) {
    cplx e = std::polar(1.0, 2 * PI * k / n);
    res += Sx(z0 + r * e) * r * e / double(n);
  }
  CHECK(rel(res, H / PI * s * sig) < 1e-8);
  for (double y : {-2.0, 1.5, 3.0}) CHECK(eq_residual(Sx, cplx(c.x_at(y) + 0.3 * H, y), 0.2) < 1e-6);
}
