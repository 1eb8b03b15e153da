#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "core/genus0.hpp"

using namespace bethe;
using namespace bethe::genus0;

namespace {

const cplx w3 = std::exp(cplx(0, 2.0 * kPi / 3.0));

Config cube_roots_config() {
  // zeros at the cube roots of unity, poles at 0 (r=1) and infinity (r=1)
  return Config({Point::finite(1.0), Point::finite(w3), Point::finite(w3 * w3)},
                {Point::finite(0.0), Point::infinity()}, {1, 1});
}

}  // namespace

TEST_CASE("sb_residual: cube roots of unity solve the SB equations") {
  auto res = sb_residual(cube_roots_config());
  REQUIRE(res.size() == 2);
  CHECK(std::abs(res[0]) < 1e-13);
  CHECK(std::abs(res[1]) < 1e-13);
}

TEST_CASE("sb_residual: direct arithmetic example") {
  Config c({Point::finite(1.0), Point::finite(2.0)}, {Point::finite(0.0)}, {1});
  auto res = sb_residual(c);
  REQUIRE(res.size() == 1);
  CHECK(std::abs(res[0] - 2.0) < 1e-14);  // 1/1 - 1/(1-2) = 2
}

TEST_CASE("sb_residual: trivial profile has no equations") {
  Config c({Point::finite(0.3)}, {}, {});
  CHECK(sb_residual(c).empty());
  CHECK(residue_check(c).empty());
}

TEST_CASE("degenerate configs rejected") {
  CHECK_THROWS_AS(Config({Point::finite(1.0), Point::finite(1.0 + 1e-14)},
                         {Point::finite(0.0)}, {1}),
                  Error);
  CHECK_THROWS_AS(Config({Point::finite(1.0)}, {Point::finite(0.0)}, {1}), Error);
}

TEST_CASE("residue_check vanishes iff sb_residual vanishes") {
  auto res0 = residue_check(cube_roots_config());
  CHECK(std::abs(res0[0]) < 1e-12);
  CHECK(std::abs(res0[1]) < 1e-12);

  Config bad({Point::finite(1.0), Point::finite(2.0)}, {Point::finite(0.0)}, {1});
  auto r = residue_check(bad);
  REQUIRE(r.size() == 1);
  CHECK(std::abs(r[0]) > 1e-6);
  // residue = 2 * SB / a^2 with a = lim phi/(x - x_1) = (1-2)/(1-0) = -1
  cplx sb = sb_residual(bad)[0];
  cplx a = (1.0 - 2.0) / (1.0 - 0.0);
  CHECK(std::abs(r[0] - 2.0 * sb / (a * a)) < 1e-10);
}

TEST_CASE("tau_yy: direct product example and trivial case") {
  Config triv({Point::finite(0.7)}, {}, {});
  CHECK(std::abs(tau_yy(triv) - 1.0) < 1e-15);

  Config c({Point::finite(0.0), Point::finite(1.0)}, {Point::finite(2.0)}, {1});
  CHECK(std::abs(tau_yy(c) - cplx(-0.5)) < 1e-14);
}

TEST_CASE("accessory: cube roots give H1 = 0; direct example gives 3") {
  auto H = accessory(cube_roots_config());
  REQUIRE(H.size() == 2);
  CHECK(std::abs(H[0]) < 1e-13);

  Config c({Point::finite(1.0), Point::finite(2.0)}, {Point::finite(0.0)}, {1});
  auto H2 = accessory(c);
  CHECK(std::abs(H2[0] - 3.0) < 1e-14);
}

TEST_CASE("identity suite (st)/(WH) on random admissible configs") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 12; ++t) {
    Config c = random_config(5, rng);
    auto res = sb_residual(c);
    auto H = accessory(c);
    // d/dx_k log tau_yy = -(sb_residual)_k
    for (int k = 0; k + 1 < c.n(); ++k) {
      auto f = [&](cplx z) {
        Config cc = c;
        cc.zeros[k].z = z;
        return std::log(tau_yy(cc));
      };
      cplx fd = bethe::fd_derivative(f, c.zeros[k].z, 1e-5).value;
      CHECK(std::abs(fd + res[k]) < 1e-6);
    }
    // 2 d/dy_j log tau_yy = H_j
    for (int j = 0; j < c.m(); ++j) {
      auto f = [&](cplx z) {
        Config cc = c;
        cc.poles[j].z = z;
        return std::log(tau_yy(cc));
      };
      cplx fd = bethe::fd_derivative(f, c.poles[j].z, 1e-5).value;
      CHECK(std::abs(2.0 * fd - H[j]) < 1e-6);
    }
  }
}

TEST_CASE("tau_yy translation invariance is exact") {
  std::mt19937_64 rng(77);
  Config c = random_config(5, rng);
  cplx v = tau_yy(c);
  Config shifted = c;
  for (auto& z : shifted.zeros) z.z += cplx(0.37, -0.21);
  for (auto& y : shifted.poles) y.z += cplx(0.37, -0.21);
  CHECK(std::abs(tau_yy(shifted) - v) < 1e-12 * std::abs(v));
}

TEST_CASE("tau_b_cubed: trivial and golden values") {
  Config triv({Point::finite(0.7)}, {}, {});
  CHECK(std::abs(tau_b_cubed(triv) - 1.0) < 1e-15);

  // x = {0,1}, y = {2(r=1)}: exponents 2/3 for every pair, and
  // (-1)^{2/3} (-2)^{2/3} (-1)^{2/3} = 2^{2/3} e^{2 pi i} = 2^{2/3}
  Config c({Point::finite(0.0), Point::finite(1.0)}, {Point::finite(2.0)}, {1});
  cplx v = tau_b_cubed(c);
  CHECK(std::abs(v - std::pow(2.0, 2.0 / 3.0)) < 1e-12);
}

TEST_CASE("accessory_alt: flagship residue 4/3 from series oracle") {
  // u/F' = -2(x^3-1)^2/(3x^4); the x^{-1} coefficient is -2/3*(-2) = 4/3
  Rational f(Poly({1.0}), Poly({-1.0, 0.0, 0.0, 1.0}));
  RationalMap F(std::move(f));
  F.critical_points.push_back({0.0, 1});
  auto Ht = accessory_alt(F);
  REQUIRE(Ht.size() == 1);
  CHECK(std::abs(Ht[0] - 4.0 / 3.0) < 1e-10);

  RationalMap mob(Rational(Poly({1.0, 2.0}), Poly({3.0, 1.0})));
  CHECK(accessory_alt(mob).empty());
}

TEST_CASE("solve_sb finds the cube-roots solution") {
  auto sols = solve_sb({Point::finite(0.0), Point::infinity()}, {1, 1}, {1.0});
  REQUIRE(!sols.empty());
  bool found = false;
  for (const auto& c : sols) {
    std::vector<cplx> zs;
    for (const auto& z : c.zeros) zs.push_back(z.z);
    // expect {1, w, w^2} in some order
    int hits = 0;
    for (cplx target : {cplx(1.0), w3, w3 * w3})
      for (cplx z : zs)
        if (std::abs(z - target) < 1e-8) ++hits;
    if (hits == 3) found = true;
    auto res = sb_residual(c);
    for (const auto& r : res) CHECK(std::abs(r) < 1e-11);
  }
  CHECK(found);
}

TEST_CASE("solve_sb: impossible profile raises NoRootFound") {
  // degree-2 covering cannot carry an order-2 critical point with the scale
  // fixed: x2 would collide with the pole
  CHECK_THROWS_AS(solve_sb({Point::finite(0.0)}, {1}, {1.0}), Error);
}

TEST_CASE("fit_covering: totally ramified degree-3 profile") {
  auto fit = fit_covering({1, 1}, 3, {cplx(0.0), cplx(1.0)});
  CHECK(fit.residual < 1e-10);
  // recompute critical values and orders from the fitted map
  RationalMap F(fit.F);
  auto d = fit.F.derivative();
  for (size_t j = 0; j < fit.critical_points.size(); ++j) {
    cplx y = fit.critical_points[j];
    CHECK(std::abs(d.eval(y)) < 1e-7);
    CHECK(std::abs(fit.F.eval(y) - (j == 0 ? cplx(0.0) : cplx(1.0))) < 1e-8);
  }
  CHECK(fit.F.den().degree() == 3);
}

TEST_CASE("fit_covering: Riemann-Hurwitz violations rejected") {
  CHECK_THROWS_AS(fit_covering({1, 1}, 4, {cplx(0.0), cplx(1.0)}), Error);
  CHECK_THROWS_AS(fit_covering({1}, 2, {cplx(0.0)}), Error);
}

TEST_CASE("fit_covering: r=(1,1,1) degree 4 at z=(0,1,2) self-consistent") {
  auto fit = fit_covering({1, 1, 1}, 4, {cplx(0.0), cplx(1.0), cplx(2.0)});
  CHECK(fit.residual < 1e-8);
  auto d = fit.F.derivative();
  for (size_t j = 0; j < fit.critical_points.size(); ++j) {
    cplx y = fit.critical_points[j];
    CHECK(std::abs(d.eval(y)) < 1e-6);
    CHECK(std::abs(fit.F.eval(y) - cplx(double(j))) < 1e-8);
  }
}

TEST_CASE("solved config: potential matches accessory via laurent_extract") {
  // For the cube-roots configuration the induced covering is
  // F = 1/(x^3-1) up to Mobius in the target; laurent data at y=0 must agree
  // with accessory().
  Rational f(Poly({1.0}), Poly({-1.0, 0.0, 0.0, 1.0}));
  auto F = std::make_shared<RationalMap>(std::move(f));
  F->critical_points.push_back({0.0, 1});
  Potential p = potential_from_map(F);
  auto [A, H] = laurent_extract(p.u, 0.0);
  auto Hacc = accessory(cube_roots_config());
  CHECK(std::abs(A - 2.0) < 1e-8);
  CHECK(std::abs(H - Hacc[0]) < 1e-8);
}
