#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/curve.hpp"

using namespace bethe;
using namespace bethe::hyper;

namespace {

// arithmetic-geometric mean (AGM oracle for the lemniscatic period ratio)
double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-15; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return a;
}

const Curve& lemniscatic() {
  static Curve c(Poly({0.0, -4.0, 0.0, 4.0}), 1e-11);  // y^2 = 4x^3 - 4x
  return c;
}

const Curve& sextic() {
  static Curve c(Poly({-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0}), 1e-10);  // y^2 = x^6 - 1
  return c;
}

const Curve& quintic() {
  static Curve c(Poly({-1.0, 0.0, 0.0, 0.0, 0.0, 1.0}), 1e-10);  // y^2 = x^5 - 1
  return c;
}

}  // namespace

TEST_CASE("lemniscatic curve has Omega = i (AGM oracle)") {
  const Curve& c = lemniscatic();
  REQUIRE(c.genus() == 1);
  // oracle: tau = i K(k')/K(k) with k^2 = 1/2, so tau = i exactly; AGM gives
  // K(1/sqrt2) both ways
  double k2 = 0.5;
  double K = kPi / (2.0 * agm(1.0, std::sqrt(1.0 - k2)));
  double Kp = kPi / (2.0 * agm(1.0, std::sqrt(k2)));
  cplx tau_oracle = cplx(0, 1) * Kp / K;
  CHECK(std::abs(c.omega().omega[0][0] - tau_oracle) < 1e-8);
  CHECK(std::abs(c.omega().omega[0][0] - cplx(0, 1)) < 1e-8);
}

TEST_CASE("period matrices: symmetry and positive definiteness, g = 2") {
  for (const Curve* c : {&sextic(), &quintic()}) {
    REQUIRE(c->genus() == 2);
    const auto& Om = c->omega().omega;
    CHECK(std::abs(Om[0][1] - Om[1][0]) < 1e-9);
    CHECK(c->omega().min_im_eigenvalue() > 0.0);
    // Riemann bilinear pairing: A^T B symmetric for the raw periods
    const auto& A = c->a_periods_raw();
    const auto& B = c->b_periods_raw();
    cplx s01 = A[0][0] * B[1][0] + A[1][0] * B[1][1] -
               (A[0][1] * B[0][0] + A[1][1] * B[0][1]);
    // (A^T B - B^T A)_{01} = sum_i A[i][0] B[i][1] - B[i][0] A[i][1]
    cplx bil = 0.0;
    for (int i = 0; i < 2; ++i) bil += A[i][0] * B[i][1] - B[i][0] * A[i][1];
    CHECK(std::abs(bil) < 1e-8 * (1.0 + std::abs(s01)));
  }
}

TEST_CASE("normalized a-periods are the identity; abel along a-cycle") {
  const Curve& c = sextic();
  // integrate v over a_1: should be e_1
  auto f = [&](cplx x, cplx y) { return c.v_dx(x, y); };
  auto per = c.integrate_tracked(c.a_cycle(0), 2, f, 1e-10);
  CHECK(std::abs(per[0] - 1.0) < 1e-9);
  CHECK(std::abs(per[1]) < 1e-9);
  auto per2 = c.integrate_tracked(c.a_cycle(1), 2, f, 1e-10);
  CHECK(std::abs(per2[0]) < 1e-9);
  CHECK(std::abs(per2[1] - 1.0) < 1e-9);
  // b-periods reproduce Omega columns
  auto perb = c.integrate_tracked(c.b_cycle(0), 2, f, 1e-10);
  CHECK(std::abs(perb[0] - c.omega().omega[0][0]) < 1e-9);
  CHECK(std::abs(perb[1] - c.omega().omega[0][1]) < 1e-9);
}

TEST_CASE("abel map: trivial path and hyperelliptic involution") {
  const Curve& c = sextic();
  auto A0 = c.abel(c.base());
  CHECK(std::abs(A0[0]) < 1e-10);
  CHECK(std::abs(A0[1]) < 1e-10);

  // A(sigma p) + A(p) is a lattice vector when measured from a branch-point
  // base: with our generic base it equals the fixed involution shift; check
  // the difference of two independent points
  SurfacePoint p = SurfacePoint::make(c.P(), cplx(0.4, 0.9), +1);
  SurfacePoint sp = SurfacePoint::make(c.P(), cplx(0.4, 0.9), -1);
  SurfacePoint q = SurfacePoint::make(c.P(), cplx(-1.3, 0.4), +1);
  SurfacePoint sq = SurfacePoint::make(c.P(), cplx(-1.3, 0.4), -1);
  auto Ap = c.abel(p), Asp = c.abel(sp), Aq = c.abel(q), Asq = c.abel(sq);
  // (A(p) + A(sigma p)) - (A(q) + A(sigma q)) = 0 mod lattice
  cvec diff(2);
  for (int j = 0; j < 2; ++j) diff[j] = Ap[j] + Asp[j] - Aq[j] - Asq[j];
  auto red = c.lattice_reduce(diff);
  // reduce returns representative in [0,1)-ish box; accept near 0 or near 1
  for (int j = 0; j < 2; ++j) {
    double d = std::min({std::abs(red[j]), std::abs(red[j] - 1.0),
                         std::abs(red[j] + 1.0)});
    CHECK(d < 1e-8);
  }
}

TEST_CASE("Riemann vanishing: Theta(K^x) = 0 on random points") {
  const Curve& c = sextic();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.3, 1.3);
  int done = 0;
  for (int t = 0; t < 60 && done < 10; ++t) {
    cplx x(U(rng), U(rng));
    bool clear = true;
    for (cplx e : c.branch_points())
      if (std::abs(x - e) < c.branch_clearance()) clear = false;
    if (!clear) continue;
    ++done;
    SurfacePoint p = SurfacePoint::make(c.P(), x, (t & 1) ? 1 : -1);
    auto Kx = c.K_of_abel(c.abel(p));
    CHECK(std::abs(theta(Kx, c.omega(), 1e-12)) < 1e-7);
  }
  REQUIRE(done == 10);
}

TEST_CASE("K holonomies along cycles: (g-1) e_j and (g-1) Omega e_j") {
  // K^{x+a_j} - K^x = (g-1) A(loop a_j) = (g-1) e_j by normalization;
  // transporting along our stored cycles realizes exactly that
  const Curve& c = sextic();
  auto f = [&](cplx x, cplx y) { return c.v_dx(x, y); };
  for (int j = 0; j < 2; ++j) {
    auto pa = c.integrate_tracked(c.a_cycle(j), 2, f, 1e-10);
    auto pb = c.integrate_tracked(c.b_cycle(j), 2, f, 1e-10);
    for (int i = 0; i < 2; ++i) {
      double gjm1 = 1.0;  // g - 1
      cplx expect_a = (i == j) ? cplx(gjm1) : cplx(0.0);
      CHECK(std::abs(gjm1 * pa[i] - expect_a) < 1e-8);
      CHECK(std::abs(gjm1 * pb[i] - gjm1 * c.omega().omega[j][i]) < 1e-8);
    }
  }
}

TEST_CASE("prime form: antisymmetry, diagonal normalization, delta independence") {
  const Curve& c = sextic();
  SurfacePoint p = SurfacePoint::make(c.P(), cplx(0.3, 0.8), +1);
  SurfacePoint q = SurfacePoint::make(c.P(), cplx(-0.9, 0.5), -1);
  cplx Epq = c.prime_form(p, q);
  cplx Eqp = c.prime_form(q, p);
  CHECK(std::abs(Epq + Eqp) < 1e-9 * std::abs(Epq));

  // diagonal: E(p, q)/(x(p) - x(q)) -> 1 for q -> p in the shared x-chart
  SurfacePoint p2 = SurfacePoint::make(c.P(), p.x + 1e-3, +1);
  // align p2's sheet with p (continuation, not principal choice)
  cplx ycont = continue_y(c.P(), p.x, p.y, p2.x);
  p2.y = ycont;
  cplx E = c.prime_form(p, p2);
  CHECK(std::abs(E / (p.x - p2.x) - 1.0) < 1e-5);

  // delta independence up to sign: compare squares
  cplx E0 = c.prime_form(p, q, 0);
  cplx E1 = c.prime_form(p, q, 1);
  CHECK(std::abs(E0 * E0 - E1 * E1) < 1e-8 * std::abs(E0 * E0));
}

TEST_CASE("prime form holonomy along b_j") {
  // transport x around b_j: E(x,q) -> E(x,q) * exp(-pi i Om_jj - 2 pi i (A(x)-A(q))_j)
  // realized by continuing A(x) along the cycle and tracking h continuously
  const Curve& c = sextic();
  int j = 0;
  SurfacePoint q = SurfacePoint::make(c.P(), cplx(1.4, 1.1), +1);
  cvec Aq = c.abel(q);

  // start point on the b-cycle
  const TrackedPath& bc = c.b_cycle(j);
  SurfacePoint x0;
  x0.x = bc.xs.front();
  x0.y = bc.y_start;
  cvec Ax = c.abel(x0);

  int delta = 0;
  const auto& ch = c.odd_characteristics()[delta];
  auto Echart = [&](const cvec& A_of_x, cplx hx) {
    cvec z(2);
    for (int i = 0; i < 2; ++i) z[i] = A_of_x[i] - Aq[i];
    Chart cq = c.chart_at(q);
    cplx hq = std::sqrt(c.sqspinor_chart(delta, cq, 0.0));
    return theta_char(ch, z, c.omega(), 1e-13) / (hx * hq);
  };

  // initial h at x0 (principal), then transported around the loop
  Chart cx0 = c.chart_at(x0);
  cplx h0 = std::sqrt(c.sqspinor_chart(delta, cx0, 0.0));
  cplx E_before = Echart(Ax, h0);

  // walk the loop: accumulate A increments and track h = sqrt(G) continuously
  cvec A_cur = Ax;
  cplx h_cur = h0;
  cplx y_cur = bc.y_start;
  std::vector<cplx> loop = bc.xs;
  loop.push_back(bc.xs.front());
  cplx G_prev = c.sqspinor_chart(delta, cx0, 0.0);
  for (size_t e = 0; e + 1 < loop.size(); ++e) {
    cplx a = loop[e], b = loop[e + 1];
    int steps = std::max(2, int(std::ceil(std::abs(b - a) / (0.2 * c.branch_clearance()))));
    for (int s = 1; s <= steps; ++s) {
      cplx xn = a + (b - a) * double(s) / double(steps);
      cplx yn = continue_y(c.P(), a + (b - a) * double(s - 1) / double(steps), y_cur, xn);
      // local A increment
      Chart loc;
      loc.kind = Chart::Kind::Affine;
      loc.center_x = a + (b - a) * double(s - 1) / double(steps);
      loc.center_y = y_cur;
      loc.P = &c.P();
      cvec inc = c.abel_increment(loc, xn - loc.center_x);
      for (int i = 0; i < 2; ++i) A_cur[i] += inc[i];
      // track h through G
      cvec v = c.v_dx(xn, yn);
      cplx G_new = 0.0;
      for (int i = 0; i < 2; ++i) G_new += c.grad_theta_odd(delta)[i] * v[i];
      h_cur *= std::sqrt(G_new / G_prev);
      G_prev = G_new;
      y_cur = yn;
    }
  }
  cplx E_after = Echart(A_cur, h_cur);
  cplx expect = std::exp(-kPi * cplx(0, 1) * c.omega().omega[j][j] -
                         2.0 * kPi * cplx(0, 1) * (Ax[j] - Aq[j]));
  cplx ratio = E_after / E_before;
  CHECK(std::abs(ratio - expect) < 1e-8 * std::abs(expect));
}

TEST_CASE("C(x): nonvanishing on random points of the sextic") {
  const Curve& c = sextic();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.4, 1.4);
  int done = 0;
  for (int t = 0; t < 120 && done < 20; ++t) {
    cplx x(U(rng), U(rng));
    bool clear = true;
    for (cplx e : c.branch_points())
      if (std::abs(x - e) < c.branch_clearance()) clear = false;
    if (!clear) continue;
    ++done;
    SurfacePoint p = SurfacePoint::make(c.P(), x, (t % 2) ? 1 : -1);
    Chart ch = c.chart_at(p);
    cplx C = c.c_differential(ch, 0.0, c.abel(p));
    CHECK(std::abs(C) > 1e-8);
  }
  REQUIRE(done == 20);
}

TEST_CASE("C(x) holonomies: trivial along a_j, known factor along b_j") {
  const Curve& c = sextic();
  // C depends on x only through K^x (plus single-valued tensor pieces), so
  // transporting along a cycle multiplies it by the theta quasi-periodicity
  // with shift (g-1) * period.  Realize by evaluating at the same point with
  // A(x) shifted by the cycle period.
  SurfacePoint p = SurfacePoint::make(c.P(), cplx(0.5, 1.2), +1);
  Chart ch = c.chart_at(p);
  cvec A = c.abel(p);
  cplx C0 = c.c_differential(ch, 0.0, A);
  for (int j = 0; j < 2; ++j) {
    cvec Aa = A;
    Aa[j] += 1.0;  // a_j shift: A -> A + e_j
    cplx Ca = c.c_differential(ch, 0.0, Aa);
    CHECK(std::abs(Ca / C0 - 1.0) < 1e-9);

    cvec Ab = A;
    for (int i = 0; i < 2; ++i) Ab[i] += c.omega().omega[j][i];
    cplx Cb = c.c_differential(ch, 0.0, Ab);
    cvec Kx = c.K_of_abel(A);
    double gm1 = 1.0;  // g - 1
    cplx expect = std::exp(-kPi * cplx(0, 1) * gm1 * gm1 * c.omega().omega[j][j] -
                           2.0 * kPi * cplx(0, 1) * gm1 * Kx[j]);
    CHECK(std::abs(Cb / C0 - expect) < 1e-7 * std::abs(expect));
  }
}

TEST_CASE("jacobi inversion: round trip on the sextic") {
  const Curve& c = sextic();
  SurfacePoint d1 = SurfacePoint::make(c.P(), cplx(0.7, 0.6), +1);
  SurfacePoint d2 = SurfacePoint::make(c.P(), cplx(-0.4, -1.1), -1);
  auto A1 = c.abel(d1), A2 = c.abel(d2);
  cvec w(2);
  for (int j = 0; j < 2; ++j) w[j] = A1[j] + A2[j];
  auto pts = c.jacobi_inversion(w);
  REQUIRE(pts.size() == 2);
  // match up to permutation
  auto close = [&](const SurfacePoint& a, const SurfacePoint& b) {
    return std::abs(a.x - b.x) < 1e-6 &&
           std::abs(a.y - b.y) < 1e-5 * (1.0 + std::abs(a.y));
  };
  bool direct = close(pts[0], d1) && close(pts[1], d2);
  bool swapped = close(pts[0], d2) && close(pts[1], d1);
  CHECK((direct || swapped));
}

TEST_CASE("genus-1 jacobi inversion reduces to lattice inversion") {
  const Curve& c = lemniscatic();
  SurfacePoint d = SurfacePoint::make(c.P(), cplx(1.9, 0.8), +1);
  auto A = c.abel(d);
  auto pts = c.jacobi_inversion(A);
  REQUIRE(pts.size() == 1);
  // Abel image of the found point equals A mod lattice
  auto Af = c.abel(pts[0]);
  cvec diff{Af[0] - A[0]};
  auto red = c.lattice_reduce(diff);
  double dm = std::min({std::abs(red[0]), std::abs(red[0] - 1.0), std::abs(red[0] + 1.0)});
  CHECK(dm < 1e-7);
}

TEST_CASE("curve rejects multiple roots and silly degrees") {
  CHECK_THROWS_AS(Curve(Poly({0.0, 0.0, 0.0, 1.0})), Error);  // x^3: triple root
  CHECK_THROWS_AS(Curve(Poly({1.0, 1.0})), Error);
}

TEST_CASE("infinite points on the sextic: principal divisor relations") {
  const Curve& c = sextic();
  auto Ainf_p = c.abel(SurfacePoint::infinity(+1));
  auto Ainf_m = c.abel(SurfacePoint::infinity(-1));
  // div(x - a) = (a,+) + (a,-) - inf_+ - inf_-  for non-branch a
  cplx a(0.37, 0.54);
  auto A1 = c.abel(SurfacePoint::make(c.P(), a, +1));
  auto A2 = c.abel(SurfacePoint::make(c.P(), a, -1));
  cvec d(2);
  for (int j = 0; j < 2; ++j) d[j] = A1[j] + A2[j] - Ainf_p[j] - Ainf_m[j];
  auto red = c.lattice_reduce(d);
  for (int j = 0; j < 2; ++j) {
    double dm = std::min({std::abs(red[j]), std::abs(red[j] - 1.0), std::abs(red[j] + 1.0)});
    CHECK(dm < 1e-8);
  }
  // div(y) = sum of branch points - 3 inf_+ - 3 inf_-
  cvec s(2, 0.0);
  for (cplx e : c.branch_points()) {
    auto Ae = c.abel(SurfacePoint::make(c.P(), e, +1));
    for (int j = 0; j < 2; ++j) s[j] += Ae[j];
  }
  for (int j = 0; j < 2; ++j) s[j] -= 3.0 * (Ainf_p[j] + Ainf_m[j]);
  auto red2 = c.lattice_reduce(s);
  for (int j = 0; j < 2; ++j) {
    double dm = std::min({std::abs(red2[j]), std::abs(red2[j] - 1.0), std::abs(red2[j] + 1.0)});
    CHECK(dm < 1e-7);
  }
}
