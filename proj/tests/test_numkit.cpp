#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/numkit.hpp"

using namespace bethe;

TEST_CASE("polynomial basics") {
  Poly p = Poly::from_roots({1.0, cplx(0, 1), cplx(0, -1)});  // (x-1)(x^2+1)
  CHECK(p.degree() == 3);
  CHECK(std::abs(p.eval(1.0)) < 1e-14);
  CHECK(std::abs(p.eval(2.0) - cplx(5.0)) < 1e-12);  // (2-1)(4+1)

  Poly d = p.derivative();
  CHECK(d.degree() == 2);
  // p = x^3 - x^2 + x - 1, p' = 3x^2 - 2x + 1
  CHECK(std::abs(d.eval(2.0) - cplx(9.0)) < 1e-12);
}

TEST_CASE("rational reduction and derivative") {
  // (x^2-1)/(x-1) reduces to x+1
  Rational r(Poly::from_roots({1.0, -1.0}), Poly::from_roots({1.0}));
  CHECK(r.num().degree() == 1);
  CHECK(std::abs(r.eval(3.0) - cplx(4.0)) < 1e-12);

  // d/dx [1/(x^3-1)] = -3x^2/(x^3-1)^2
  Rational f(Poly({1.0}), Poly({-1.0, 0.0, 0.0, 1.0}));
  Rational fp = f.derivative();
  cplx x = cplx(0.3, 0.7);
  cplx expect = -3.0 * x * x / std::pow(x * x * x - 1.0, 2);
  CHECK(std::abs(fp.eval(x) - expect) < 1e-12);
}

TEST_CASE("contour_integrate: residue theorem basics") {
  auto unit = ContourSpec::circle(0.0, 1.0);
  cplx I1 = contour_integrate([](cplx z) { return 1.0 / z; }, unit, 1e-12);
  CHECK(std::abs(I1 - kTwoPiI) < 1e-11);

  cplx I2 = contour_integrate([](cplx z) { return z * z; }, unit, 1e-12);
  CHECK(std::abs(I2) < 1e-11);
}

TEST_CASE("contour_integrate: x^2/(x^2-1)^2 around x=1 has residue 1/4") {
  // Laurent at x=1: x^2/(x^2-1)^2 = 1/4 xi^-2 + 1/4 xi^-1 + O(1)
  auto c = ContourSpec::circle(1.0, 0.3);
  cplx I = contour_integrate(
      [](cplx x) { return x * x / std::pow(x * x - 1.0, 2); }, c, 1e-12);
  CHECK(std::abs(I - kTwoPiI * 0.25) < 1e-10);
}

TEST_CASE("contour_integrate: polynomial over any closed contour is 0") {
  auto box = ContourSpec::polyline({cplx(-1, -1), cplx(2, -1), cplx(2, 1.5), cplx(-1, 1)},
                                   /*closed=*/true);
  cplx I = contour_integrate(
      [](cplx z) { return 3.0 * z * z * z - cplx(0, 2) * z + 5.0; }, box, 1e-12);
  CHECK(std::abs(I) < 1e-10);
}

TEST_CASE("contour_integrate: orientation antisymmetry") {
  auto fwd = ContourSpec::circle(0.5, 1.2, +1);
  auto rev = ContourSpec::circle(0.5, 1.2, -1);
  auto f = [](cplx z) { return std::exp(z) / (z - 0.2); };
  cplx a = contour_integrate(f, fwd, 1e-11);
  cplx b = contour_integrate(f, rev, 1e-11);
  CHECK(std::abs(a + b) < 2e-11);
}

TEST_CASE("contour_integrate: singular sample aborts") {
  auto c = ContourSpec::circle(0.0, 1.0);
  CHECK_THROWS_AS(
      contour_integrate([](cplx z) { return 1.0 / std::pow(z - 1.0, 8); }, c, 1e-12),
      Error);
}

TEST_CASE("newton_multistart: z^2+1") {
  VecFn F = [](const std::vector<cplx>& z) {
    return std::vector<cplx>{z[0] * z[0] + 1.0};
  };
  auto roots = newton_multistart(F, {{cplx(1, 1)}, {cplx(1, -1)}});
  REQUIRE(roots.size() == 2);
  for (const auto& r : roots) CHECK(std::abs(std::abs(r[0].imag()) - 1.0) < 1e-11);
}

TEST_CASE("newton_multistart: cube roots of unity, residual honored") {
  VecFn F = [](const std::vector<cplx>& z) {
    return std::vector<cplx>{z[0] * z[0] * z[0] - 1.0};
  };
  std::vector<std::vector<cplx>> seeds;
  for (int k = 0; k < 3; ++k) {
    cplx w = std::exp(cplx(0, 2.0 * kPi * k / 3.0)) + cplx(0.05, -0.03);
    seeds.push_back({w});
  }
  NewtonOptions opt;
  auto roots = newton_multistart(F, seeds, opt);
  REQUIRE(roots.size() == 3);
  for (const auto& r : roots) {
    auto res = F(r);
    CHECK(std::abs(res[0]) < opt.tol);
  }
}

TEST_CASE("newton_multistart: all seeds fail raises NoRootFound") {
  VecFn F = [](const std::vector<cplx>& z) {
    return std::vector<cplx>{std::exp(z[0]) + 10.0 * z[0] * 0.0 + 5.0};
  };
  // exp(z) = -5 has roots, but give a hopeless flat system instead
  VecFn G = [](const std::vector<cplx>& z) {
    (void)z;
    return std::vector<cplx>{cplx(1.0)};
  };
  CHECK_THROWS_AS(newton_multistart(G, {{cplx(0)}}), Error);
  (void)F;
}

TEST_CASE("fd_derivative on polynomials and exp") {
  auto sq = [](cplx z) { return z * z; };
  auto r = fd_derivative(sq, 1.0, 1e-5);
  CHECK(std::abs(r.value - 2.0) < 1e-9);
  CHECK(r.method == "central");

  auto e = fd_derivative([](cplx z) { return std::exp(z); }, 0.0, 1e-5);
  CHECK(std::abs(e.value - 1.0) < 1e-9);

  // degree <= 3 exactness within 1e-8 at h=1e-5
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Poly p({cplx(U(rng), U(rng)), cplx(U(rng), U(rng)), cplx(U(rng), U(rng)),
            cplx(U(rng), U(rng))});
    cplx z0(U(rng), U(rng));
    auto est = fd_derivative([&](cplx z) { return p.eval(z); }, z0, 1e-5);
    CHECK(std::abs(est.value - p.derivative().eval(z0)) < 1e-8);
  }
}

TEST_CASE("fd_jet3 matches exact rational jets") {
  Rational f(Poly({1.0}), Poly({-1.0, 0.0, 0.0, 1.0}));  // 1/(x^3-1)
  Rational f1 = f.derivative();
  Rational f2 = f1.derivative();
  Rational f3 = f2.derivative();
  cplx x0(2.0, 0.5);
  auto jet = fd_jet3([&](cplx z) { return f.eval(z); }, x0, 1e-3);
  CHECK(std::abs(jet[0] - f.eval(x0)) < 1e-12);
  CHECK(std::abs(jet[1] - f1.eval(x0)) < 1e-9);
  CHECK(std::abs(jet[2] - f2.eval(x0)) < 1e-7);
  CHECK(std::abs(jet[3] - f3.eval(x0)) < 1e-5);
}

TEST_CASE("dense solve and eigenvalues") {
  std::vector<std::vector<cplx>> A{{cplx(2, 1), cplx(0, -1)}, {cplx(1, 0), cplx(3, 0)}};
  std::vector<cplx> b{cplx(1, 0), cplx(0, 1)};
  auto x = solve_dense(A, b);
  cplx r0 = A[0][0] * x[0] + A[0][1] * x[1] - b[0];
  cplx r1 = A[1][0] * x[0] + A[1][1] * x[1] - b[1];
  CHECK(std::abs(r0) < 1e-13);
  CHECK(std::abs(r1) < 1e-13);

  auto ev = sym_eigenvalues({{2.0, 1.0}, {1.0, 2.0}});
  CHECK(std::abs(ev[0] - 1.0) < 1e-12);
  CHECK(std::abs(ev[1] - 3.0) < 1e-12);
}
