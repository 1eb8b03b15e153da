#include "core/genusg.hpp"

#include <algorithm>
#include <cmath>

namespace bethe {
namespace genusg {

namespace {

// half-integer rounding into {0, 1/2} mod 1
double round_half(double v) {
  double r = v - std::floor(v);
  double best = 0.0, bd = 1e300;
  for (double c : {0.0, 0.5, 1.0}) {
    if (std::abs(r - c) < bd) {
      bd = std::abs(r - c);
      best = c;
    }
  }
  return best == 1.0 ? 0.0 : best;
}

}  // namespace

Characteristics characteristic_vectors(const Curve& curve,
                                       const std::vector<SurfacePoint>& points,
                                       const std::vector<int>& weights,
                                       double tol) {
  int g = curve.genus();
  cvec t(g, 0.0);
  for (size_t i = 0; i < points.size(); ++i) {
    cvec A = curve.abel(points[i]);
    for (int j = 0; j < g; ++j) t[j] += double(weights[i]) * A[j];
  }
  for (int j = 0; j < g; ++j) t[j] -= curve.K_base()[j];

  // t = Omega b1 + b2 (mod lattice) with half-integer b1, b2
  const auto& Y = curve.omega().im();
  std::vector<std::vector<cplx>> Yc(g, std::vector<cplx>(g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) Yc[i][j] = Y[i][j];
  std::vector<cplx> rhs(g);
  for (int i = 0; i < g; ++i) rhs[i] = t[i].imag();
  auto s = solve_dense(Yc, rhs);
  Characteristics ch;
  ch.beta1.resize(g);
  ch.beta2.resize(g);
  for (int i = 0; i < g; ++i) ch.beta1[i] = round_half(s[i].real());
  cvec rem(g);
  for (int i = 0; i < g; ++i) {
    rem[i] = t[i];
    for (int j = 0; j < g; ++j)
      rem[i] -= curve.omega().omega[i][j] * ch.beta1[j];
  }
  for (int i = 0; i < g; ++i) ch.beta2[i] = round_half(rem[i].real());
  cvec defect(g);
  for (int i = 0; i < g; ++i) defect[i] = rem[i] - ch.beta2[i];
  auto red = curve.lattice_reduce(defect);
  double res = 0.0;
  for (int i = 0; i < g; ++i) {
    double d = std::min({std::abs(red[i]), std::abs(red[i] - 1.0),
                         std::abs(red[i] + 1.0)});
    res = std::max(res, d);
  }
  ch.residual = res;
  if (res > tol)
    fail(ErrCode::NotCanonical, "-2D is not canonical within tolerance");
  return ch;
}

Config::Config(std::shared_ptr<const Curve> curve, std::vector<SurfacePoint> zeros,
               std::vector<SurfacePoint> poles, std::vector<int> orders,
               double char_tol)
    : curve_(std::move(curve)), zeros_(std::move(zeros)), poles_(std::move(poles)),
      orders_(std::move(orders)) {
  if (poles_.size() != orders_.size()) fail(ErrCode::BadInput, "orders vs poles");
  for (int r : orders_)
    if (r < 1) fail(ErrCode::BadInput, "orders must be >= 1");
  std::vector<SurfacePoint> pts;
  std::vector<int> weights;
  for (size_t j = 0; j < poles_.size(); ++j) {
    pts.push_back(poles_[j]);
    weights.push_back(-orders_[j]);
  }
  for (const auto& z : zeros_) {
    pts.push_back(z);
    weights.push_back(1);
  }
  init(pts, weights, char_tol);
}

Config Config::from_divisor(std::shared_ptr<const Curve> curve,
                            const std::vector<SurfacePoint>& points,
                            const std::vector<int>& weights, double char_tol) {
  Config c;
  c.curve_ = std::move(curve);
  // negative weights first to match the pole-then-zero layout
  std::vector<SurfacePoint> pts;
  std::vector<int> ws;
  for (size_t i = 0; i < points.size(); ++i)
    if (weights[i] < 0) {
      pts.push_back(points[i]);
      ws.push_back(weights[i]);
      c.poles_.push_back(points[i]);
      c.orders_.push_back(-weights[i]);
    }
  for (size_t i = 0; i < points.size(); ++i)
    if (weights[i] > 0) {
      pts.push_back(points[i]);
      ws.push_back(weights[i]);
      c.zeros_.push_back(points[i]);
    }
  c.init(pts, ws, char_tol);
  return c;
}

void Config::init(const std::vector<SurfacePoint>& pts,
                  const std::vector<int>& weights, double char_tol) {
  int g = curve_->genus();
  int dsum = 0;
  for (int w : weights) dsum += w;
  if (dsum != 1 - g)
    fail(ErrCode::DegenerateConfig, "divisor degree must be 1 - g");
  // distinctness (finite points; infinite points are distinct by sheet)
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b) {
      if (pts[a].infinite || pts[b].infinite) {
        if (pts[a].infinite && pts[b].infinite && pts[a].sheet == pts[b].sheet)
          fail(ErrCode::DegenerateConfig, "coincident infinite points");
        continue;
      }
      if (std::abs(pts[a].x - pts[b].x) < 1e-10 &&
          std::abs(pts[a].y - pts[b].y) < 1e-8 * (1.0 + std::abs(pts[a].y)))
        fail(ErrCode::DegenerateConfig, "coincident divisor points");
    }

  chars_ = characteristic_vectors(*curve_, pts, weights, char_tol);

  for (size_t i = 0; i < pts.size(); ++i) {
    DivisorPoint dp;
    dp.p = pts[i];
    dp.d = weights[i];
    dp.chart = curve_->chart_at(pts[i]);
    dp.abel = curve_->abel(pts[i]);
    div_.push_back(std::move(dp));
  }

  // The holonomy cancellation needs the characteristic equation to hold
  // exactly, not just mod the lattice (the paper's fundamental-polygon
  // convention).  Absorb the lattice defect into the stored Abel images:
  // gcd of the weights divides deg D = 1 - g with the zeros' +1 entries, so
  // integer coefficients c_i with sum c_i d_i = 1 always exist.
  {
    cvec defect(g, 0.0);
    for (const auto& dp : div_)
      for (int j = 0; j < g; ++j) defect[j] += double(dp.d) * dp.abel[j];
    for (int j = 0; j < g; ++j) {
      defect[j] -= curve_->K_base()[j];
      defect[j] -= chars_.beta2[j];
      for (int i = 0; i < g; ++i)
        defect[j] -= curve_->omega().omega[j][i] * chars_.beta1[i];
    }
    std::vector<long> m, k;
    cvec resid = curve_->lattice_reduce(defect, &m, &k);
    // extended gcd over the weights
    std::vector<long> coeff(div_.size(), 0);
    long run = div_[0].d;
    coeff[0] = 1;
    for (size_t i = 1; i < div_.size() && std::labs(run) != 1; ++i) {
      // find u, v with u*run + v*d_i = gcd(run, d_i)
      long a = run, b = div_[i].d;
      long u0 = 1, v0 = 0, u1 = 0, v1 = 1;
      while (b != 0) {
        long q = a / b;
        std::tie(a, b) = std::make_tuple(b, a - q * b);
        std::tie(u0, u1) = std::make_tuple(u1, u0 - q * u1);
        std::tie(v0, v1) = std::make_tuple(v1, v0 - q * v1);
      }
      for (size_t t = 0; t < i; ++t) coeff[t] *= u0;
      coeff[i] = v0;
      run = a;
    }
    if (std::labs(run) != 1)
      fail(ErrCode::DegenerateConfig, "divisor weights share a factor");
    long sign = run;  // gcd = +/-1
    for (auto& cc : coeff) cc *= sign;
    // subtract c_i * (Omega m + k) from each divisor Abel image
    cvec lat(g, 0.0);
    for (int j = 0; j < g; ++j) {
      lat[j] = double(k[j]);
      for (int i = 0; i < g; ++i)
        lat[j] += curve_->omega().omega[j][i] * double(m[i]);
    }
    for (size_t i = 0; i < div_.size(); ++i)
      for (int j = 0; j < g; ++j)
        div_[i].abel[j] -= double(coeff[i]) * lat[j];
    (void)resid;
  }

  // odd characteristic safe at every divisor point
  delta_ = -1;
  const auto& odds = curve_->odd_characteristics();
  for (size_t d = 0; d < odds.size(); ++d) {
    bool ok = true;
    for (const auto& dp : div_) {
      cplx G = curve_->sqspinor_chart(int(d), dp.chart, 0.0);
      double vmax = 0.0;
      for (const cplx& v : curve_->v_chart(dp.chart, 0.0))
        vmax = std::max(vmax, std::abs(v));
      double scale = 0.0;
      for (int j = 0; j < g; ++j)
        scale = std::max(scale, std::abs(curve_->grad_theta_odd(int(d))[j]));
      if (std::abs(G) < 1e-5 * scale * std::max(vmax, 1e-30)) ok = false;
    }
    if (ok) {
      delta_ = int(d);
      break;
    }
  }
  if (delta_ < 0)
    fail(ErrCode::SingularCharacteristic, "no odd characteristic safe for the divisor");
  for (auto& dp : div_)
    dp.h_ref = std::sqrt(curve_->sqspinor_chart(delta_, dp.chart, 0.0));
}

cplx Config::G_chart(const Chart& ch, cplx xi) const {
  return curve_->sqspinor_chart(delta_, ch, xi);
}

// ---------------------------------------------------------------------------

TransportState transport_start(const Config& c, const SurfacePoint& p) {
  TransportState st;
  st.x = p.x;
  st.y = p.y;
  st.abel = c.curve().abel(p);
  Chart ch;
  ch.kind = Chart::Kind::Affine;
  ch.center_x = p.x;
  ch.center_y = p.y;
  ch.P = &c.curve().P();
  st.G = c.G_chart(ch, 0.0);
  st.h = std::sqrt(st.G);
  return st;
}

void transport_advance(const Config& c, TransportState& st, cplx x_next) {
  const Curve& cv = c.curve();
  // subdivide so both P and G rotate slowly
  int guard = 0;
  while (std::abs(st.x - x_next) > 0.0) {
    if (++guard > 100000)
      fail(ErrCode::BranchTrackingFailure, "phi transport stalled");
    cplx target = x_next;
    for (int halve = 0; halve < 48; ++halve) {
      cplx pn = cv.P().eval(target);
      cplx pv = cv.P().eval(st.x);
      if (std::abs(std::arg(pn / pv)) < kPi / 4.0) break;
      target = st.x + 0.5 * (target - st.x);
    }
    cplx ynext = hyper::continue_y(cv.P(), st.x, st.y, target);
    Chart loc;
    loc.kind = Chart::Kind::Affine;
    loc.center_x = st.x;
    loc.center_y = st.y;
    loc.P = &cv.P();
    cvec inc = cv.abel_increment(loc, target - st.x);
    for (int j = 0; j < cv.genus(); ++j) st.abel[j] += inc[j];
    // advance h through the spinor square; halve further if G spins fast
    cvec vn = cv.v_dx(target, ynext);
    cplx Gn = 0.0;
    for (int j = 0; j < cv.genus(); ++j)
      Gn += cv.grad_theta_odd(c.delta())[j] * vn[j];
    if (std::abs(std::arg(Gn / st.G)) > kPi / 4.0 &&
        std::abs(target - st.x) > 1e-12) {
      // try a shorter move by rolling back the abel increment
      for (int j = 0; j < cv.genus(); ++j) st.abel[j] -= inc[j];
      cplx shorter = st.x + 0.5 * (target - st.x);
      if (std::abs(shorter - st.x) == 0.0)
        fail(ErrCode::BranchTrackingFailure, "spinor branch spins too fast");
      // recurse on the shorter move
      transport_advance(c, st, shorter);
      continue;
    }
    st.h *= std::sqrt(Gn / st.G);
    st.G = Gn;
    st.x = target;
    st.y = ynext;
  }
}

cplx phi_x(const Config& c, const TransportState& st) {
  const Curve& cv = c.curve();
  int g = cv.genus();
  const auto& b1 = c.characteristics().beta1;
  cplx expo = 0.0;
  for (int j = 0; j < g; ++j) expo += b1[j] * st.abel[j];
  if (g == 1) expo += 0.5 * st.abel[0];  // degenerate-limit spin shift
  cplx val = std::exp(-2.0 * kPi * cplx(0, 1) * expo);
  const auto& odd = cv.odd_characteristics()[c.delta()];
  for (const auto& dp : c.divisor()) {
    cvec z(g);
    for (int j = 0; j < g; ++j) z[j] = st.abel[j] - dp.abel[j];
    cplx th = theta_char(odd, z, cv.omega(), 1e-13) / dp.h_ref;
    if (dp.d >= 0)
      for (int rep = 0; rep < dp.d; ++rep) val *= th;
    else
      for (int rep = 0; rep < -dp.d; ++rep) val /= th;
  }
  if (g >= 2) {
    // C(x)^{1/(g-1)} and h(x)^{g-1}; only g = 2 is exercised numerically
    if (g != 2) fail(ErrCode::UnsupportedOrder, "phi implemented for g <= 2");
    Chart loc;
    loc.kind = Chart::Kind::Affine;
    loc.center_x = st.x;
    loc.center_y = st.y;
    loc.P = &cv.P();
    val *= cv.c_differential(loc, 0.0, st.abel);
    val *= st.h;
  }
  return val;
}

cplx phi_eval(const Config& c, const SurfacePoint& p) {
  TransportState st = transport_start(c, p);
  return phi_x(c, st);
}

// ---------------------------------------------------------------------------

namespace {

// d/dxi log theta[delta](A(x(xi)) - A(q)) at xi = 0 in the chart of `at`
cplx dlog_theta_pair(const Config& c, const DivisorPoint& at, const cvec& Aq) {
  const Curve& cv = c.curve();
  int g = cv.genus();
  cvec z(g);
  for (int j = 0; j < g; ++j) z[j] = at.abel[j] - Aq[j];
  const auto& odd = cv.odd_characteristics()[c.delta()];
  cplx th = theta_char(odd, z, cv.omega(), 1e-13);
  cvec v = cv.v_chart(at.chart, 0.0);
  cplx s = 0.0;
  for (int j = 0; j < g; ++j)
    s += theta_char_deriv(odd, j, z, cv.omega(), 1e-13) * v[j];
  return s / th;
}

// d/dxi log h(xi) = G'/(2G) at the chart center, Richardson step 1e-5
cplx dlog_h(const Config& c, const Chart& ch) {
  double h = 1e-5;
  cplx g1 = (c.G_chart(ch, h) - c.G_chart(ch, -h)) / (2.0 * h);
  cplx g2 = (c.G_chart(ch, h / 2.0) - c.G_chart(ch, -h / 2.0)) / h;
  cplx d = (4.0 * g2 - g1) / 3.0;
  return d / (2.0 * c.G_chart(ch, 0.0));
}

// E'_1/E(at, q) in the chart at `at` (derivative in the first slot)
cplx dlogE_first(const Config& c, const DivisorPoint& at, const DivisorPoint& q) {
  return dlog_theta_pair(c, at, q.abel) - dlog_h(c, at.chart);
}

// d/dxi log C(x(xi)) at the chart center
cplx dlog_C(const Config& c, const DivisorPoint& at) {
  const Curve& cv = c.curve();
  double h = 1e-5;
  cplx c0 = cv.c_differential(at.chart, 0.0, at.abel);
  cplx cp = cv.c_differential(at.chart, h, at.abel);
  cplx cm = cv.c_differential(at.chart, -h, at.abel);
  cplx cp2 = cv.c_differential(at.chart, h / 2.0, at.abel);
  cplx cm2 = cv.c_differential(at.chart, -h / 2.0, at.abel);
  cplx d1 = (cp - cm) / (2.0 * h);
  cplx d2 = (cp2 - cm2) / h;
  return ((4.0 * d2 - d1) / 3.0) / c0;
}

}  // namespace

std::vector<cplx> sb_residual(const Config& c) {
  const Curve& cv = c.curve();
  int g = cv.genus();
  std::vector<cplx> out;
  for (int k = 0; k + 1 < c.n(); ++k) {
    const DivisorPoint& xk = c.zero(k);
    cplx s = 0.0;
    for (int j = 0; j < c.m(); ++j)
      s += double(c.orders()[j]) * dlogE_first(c, xk, c.pole(j));
    for (int j = 0; j < c.n(); ++j)
      if (j != k) s -= dlogE_first(c, xk, c.zero(j));
    if (g >= 2) s += (1.0 / (1.0 - double(g))) * dlog_C(c, xk);
    cvec v = cv.v_chart(xk.chart, 0.0);
    const auto& b1 = c.characteristics().beta1;
    for (int j = 0; j < g; ++j)
      s += 2.0 * kPi * cplx(0, 1) * b1[j] * v[j];
    if (g == 1) s += 2.0 * kPi * cplx(0, 1) * 0.5 * v[0];
    out.push_back(s);
  }
  return out;
}

ResidueOracle residue_oracle(const Config& c, double tol) {
  ResidueOracle out;
  const Curve& cv = c.curve();
  for (int k = 0; k + 1 < c.n(); ++k) {
    const DivisorPoint& xk = c.zero(k);
    if (xk.p.infinite)
      fail(ErrCode::UnsupportedOrder, "residue oracle needs finite zeros");
    // chart radius: clear of the rest of the divisor and the branch points
    double rad = 0.45 * cv.branch_clearance();
    for (const auto& dp : c.divisor()) {
      if (dp.p.infinite) continue;
      double d = std::abs(dp.p.x - xk.p.x);
      if (d > 1e-12) rad = std::min(rad, 0.45 * d);
    }
    for (cplx e : cv.branch_points())
      rad = std::min(rad, 0.45 * std::abs(e - xk.p.x));

    // trapezoid on the circle with sequential transport, doubling until
    // stable; the same sweep collects the circle mean of phi/xi, whose
    // spectral limit is the leading coefficient of the simple zero
    auto sweep = [&](int N, cplx* lead_out) {
      cplx acc = 0.0, lead = 0.0;
      TransportState st = transport_start(c, xk.chart.point(rad));
      cplx phi0 = phi_x(c, st);
      cplx prev_xi = rad;
      for (int s = 1; s <= N; ++s) {
        cplx xi = rad * std::exp(cplx(0, 2.0 * kPi * s / N));
        cplx phi = (s == 1) ? phi0 : phi_x(c, st);
        acc += (1.0 / (phi * phi)) * prev_xi;
        lead += phi / prev_xi;
        transport_advance(c, st, xk.p.x + xi);
        prev_xi = xi;
      }
      if (lead_out) *lead_out = lead / double(N);
      return acc * (2.0 * kPi * cplx(0, 1) / double(N)) / kTwoPiI;
    };
    cplx lead = 0.0;
    cplx r1 = sweep(64, nullptr), r2 = sweep(128, &lead);
    int N = 128;
    while (std::abs(r1 - r2) > tol * std::max(1.0, std::abs(r2)) && N < 1024) {
      N *= 2;
      r1 = r2;
      r2 = sweep(N, &lead);
    }
    out.residue.push_back(r2);
    out.lead.push_back(lead);
  }
  return out;
}

cplx tau_yy(const Config& c) { return tau_yy_displaced(c, -1, 0.0); }

cplx tau_yy_displaced(const Config& c, int which, cplx xi) {
  const Curve& cv = c.curve();
  int g = cv.genus();
  const auto& odd = cv.odd_characteristics()[c.delta()];

  // displaced data for the moving point
  std::vector<cvec> abel(c.divisor().size());
  std::vector<cplx> h(c.divisor().size());
  for (size_t i = 0; i < c.divisor().size(); ++i) {
    abel[i] = c.divisor()[i].abel;
    h[i] = c.divisor()[i].h_ref;
  }
  if (which >= 0 && std::abs(xi) > 0.0) {
    const DivisorPoint& dp = c.divisor()[which];
    cvec inc = cv.abel_increment(dp.chart, xi);
    for (int j = 0; j < g; ++j) abel[which][j] += inc[j];
    h[which] = dp.h_ref * std::sqrt(c.G_chart(dp.chart, xi) /
                                    c.G_chart(dp.chart, 0.0));
  }

  const auto& b1 = c.characteristics().beta1;
  cplx expo = 0.0;
  for (int k = 0; k < c.n(); ++k) {
    int idx = c.m() + k;
    for (int j = 0; j < g; ++j) expo += b1[j] * abel[idx][j];
  }
  cplx val = std::exp(-2.0 * kPi * cplx(0, 1) * expo);

  // C^{1/(g-1)} at the zeros (g = 2 in practice)
  if (g >= 2) {
    if (g != 2) fail(ErrCode::UnsupportedOrder, "tau_yy implemented for g <= 2");
    for (int k = 0; k < c.n(); ++k) {
      int idx = c.m() + k;
      const DivisorPoint& dp = c.divisor()[idx];
      cplx at = (idx == which) ? xi : cplx(0.0);
      // C in the zero's chart, with the anchored Abel image
      cvec base = dp.abel;
      val *= cv.c_differential(dp.chart, at, base);
    }
  }

  // unordered prime-form pairs E^{d_j d_k}: this normalization matches the
  // genus-0 discriminant form and makes the generating-function identities
  // exact (the ordered product would double the pair terms but not the
  // C and exponential factors)
  for (size_t a = 0; a < c.divisor().size(); ++a)
    for (size_t b = a + 1; b < c.divisor().size(); ++b) {
      cvec z(g);
      for (int j = 0; j < g; ++j) z[j] = abel[a][j] - abel[b][j];
      cplx E = theta_char(odd, z, cv.omega(), 1e-13) / (h[a] * h[b]);
      int e = c.divisor()[a].d * c.divisor()[b].d;
      if (e >= 0)
        for (int rep = 0; rep < e; ++rep) val *= E;
      else
        for (int rep = 0; rep < -e; ++rep) val /= E;
    }
  return val;
}

std::vector<cplx> accessory(const Config& c) {
  // E'_2/E(q, y_k) in the chart at y_k equals the first-slot expression
  // dlogE_first(y_k, q): theta[delta] is odd, so swapping arguments flips
  // both the theta value and the sign from the inner derivative.
  std::vector<cplx> out;
  for (int k = 0; k < c.m(); ++k) {
    const DivisorPoint& yk = c.pole(k);
    cplx s = 0.0;
    for (int l = 0; l < c.m(); ++l)
      if (l != k) s += double(c.orders()[l]) * dlogE_first(c, yk, c.pole(l));
    for (int j = 0; j < c.n(); ++j) s -= dlogE_first(c, yk, c.zero(j));
    out.push_back(2.0 * double(c.orders()[k]) * s);
  }
  return out;
}

PeriodReport period_conditions(const Config& c, double tol) {
  PeriodReport rep;
  const Curve& cv = c.curve();
  int g = cv.genus();

  // integrate phi^{-2} along a stored cycle with panel adaptivity; panels
  // re-anchor their transported state at the left endpoint
  auto integrate_cycle = [&](const hyper::TrackedPath& cyc) {
    std::vector<cplx> xs = cyc.xs;
    xs.push_back(xs.front());
    TransportState st = transport_start(
        c, SurfacePoint{xs.front(), 0, cyc.y_start, false});
    // fix the sheet data explicitly: transport_start recomputes abel via the
    // curve conventions, matching the cycle's own lift
    st.y = cyc.y_start;
    cplx total = 0.0;
    const auto& [gx, gw] = gauss_legendre(16);
    std::function<void(cplx, cplx, TransportState&, double, int)> panel =
        [&](cplx a, cplx b, TransportState& sa, double ptol, int depth) {
          auto eval16 = [&](cplx aa, cplx bb, TransportState s0,
                            cplx& out) -> TransportState {
            out = 0.0;
            for (int i = 0; i < 16; ++i) {
              cplx xn = aa + (bb - aa) * (0.5 + 0.5 * gx[i]);
              transport_advance(c, s0, xn);
              cplx ph = phi_x(c, s0);
              out += (1.0 / (ph * ph)) * (bb - aa) * (0.5 * gw[i]);
            }
            transport_advance(c, s0, bb);
            return s0;
          };
          cplx whole, left, right;
          eval16(a, b, sa, whole);
          cplx mid = 0.5 * (a + b);
          TransportState smid = eval16(a, mid, sa, left);
          TransportState sb = eval16(mid, b, smid, right);
          double err = std::abs(whole - (left + right));
          if (err <= ptol * std::max(1.0, std::abs(left + right)) || depth >= 12) {
            if (err > ptol * std::max(1.0, std::abs(left + right)) && depth >= 12)
              fail(ErrCode::NonConvergence, "phi period quadrature depth cap");
            total += left + right;
            sa = sb;
            return;
          }
          panel(a, mid, sa, ptol * 0.6, depth + 1);
          panel(mid, b, sa, ptol * 0.6, depth + 1);
        };
    double edge_tol = tol / double(xs.size());
    for (size_t e = 0; e + 1 < xs.size(); ++e) {
      if (std::abs(xs[e + 1] - xs[e]) < 1e-15) continue;
      panel(xs[e], xs[e + 1], st, edge_tol, 0);
    }
    return total;
  };

  for (int i = 0; i < g; ++i) {
    rep.a_periods.push_back(integrate_cycle(cv.a_cycle(i)));
    rep.b_periods.push_back(integrate_cycle(cv.b_cycle(i)));
  }
  auto oracle = residue_oracle(c, std::max(tol, 1e-10));
  rep.residues = oracle.residue;
  return rep;
}

cplx cycle_holonomy(const Config& c, const hyper::TrackedPath& cycle) {
  TransportState st = transport_start(
      c, SurfacePoint{cycle.xs.front(), 0, cycle.y_start, false});
  st.y = cycle.y_start;
  cplx before = phi_x(c, st);
  std::vector<cplx> xs = cycle.xs;
  xs.push_back(xs.front());
  for (size_t e = 0; e + 1 < xs.size(); ++e) {
    cplx a = xs[e], b = xs[e + 1];
    int steps = std::max(
        1, int(std::ceil(std::abs(b - a) / (0.3 * c.curve().branch_clearance()))));
    for (int s = 1; s <= steps; ++s)
      transport_advance(c, st, a + (b - a) * double(s) / double(steps));
  }
  cplx after = phi_x(c, st);
  return after / before;
}

TauB tau_b_three_halves(const Config& c, const CurveMap& F,
                        const std::vector<cplx>& samples, double q_tol) {
  const Curve& cv = c.curve();
  int g = cv.genus();
  if (g != 2) fail(ErrCode::UnsupportedOrder, "tau_B^{3/2} implemented for g = 2");
  TauB out;

  // distinguished-chart jacobians d zeta/d xi at the divisor points
  for (const auto& dp : c.divisor()) {
    if (dp.p.infinite) {
      out.jacobians.push_back(1.0);  // degenerate at non-simple points
      continue;
    }
    if (dp.d < 0) {
      // critical point: zeta = (F - F(y))^{1/(2r+1)}
      int r = -dp.d;
      cplx Fy = F.eval(dp.p.x, dp.p.y);
      auto cj = [&](double step) {
        SurfacePoint q = dp.chart.point(step);
        return (F.eval(q.x, q.y) - Fy) / std::pow(cplx(step), 2 * r + 1);
      };
      cplx c1 = cj(1e-2), c2 = cj(5e-3);
      cplx lead = 2.0 * c2 - c1;  // first-order Richardson in the step
      out.jacobians.push_back(std::pow(lead, 1.0 / double(2 * r + 1)));
    } else {
      // zero of phi = simple pole of F: zeta = 1/F
      auto cj = [&](double step) {
        SurfacePoint q = dp.chart.point(step);
        return (1.0 / F.eval(q.x, q.y)) / step;
      };
      cplx c1 = cj(1e-3), c2 = cj(5e-4);
      out.jacobians.push_back(2.0 * c2 - c1);
    }
  }

  // Q at the samples: sqrt(dF) * C^{1/(1-g)} e^{2 pi i <b1,K^x>/(g-1)} prod Etilde^{-d_j}
  const auto& b1 = c.characteristics().beta1;
  const auto& odd = cv.odd_characteristics()[c.delta()];
  std::vector<cplx> Qs;
  for (cplx sx : samples) {
    SurfacePoint p = SurfacePoint::make(cv.P(), sx, +1);
    TransportState st = transport_start(c, p);
    auto jet = F.jet(st.x, st.y);
    cplx val = std::sqrt(jet[1]);
    Chart loc;
    loc.kind = Chart::Kind::Affine;
    loc.center_x = st.x;
    loc.center_y = st.y;
    loc.P = &cv.P();
    val /= cv.c_differential(loc, 0.0, st.abel);  // C^{1/(1-g)} = 1/C at g=2
    cvec Kx = cv.K_of_abel(st.abel);
    cplx expo = 0.0;
    for (int j = 0; j < g; ++j) expo += b1[j] * Kx[j];
    val *= std::exp(2.0 * kPi * cplx(0, 1) * expo);  // /(g-1) with g = 2
    for (size_t i = 0; i < c.divisor().size(); ++i) {
      const auto& dp = c.divisor()[i];
      cvec z(g);
      for (int j = 0; j < g; ++j) z[j] = st.abel[j] - dp.abel[j];
      cplx Et = theta_char(odd, z, cv.omega(), 1e-13) /
                (st.h * dp.h_ref * std::sqrt(out.jacobians[i]));
      if (dp.d >= 0)
        for (int rep = 0; rep < dp.d; ++rep) val /= Et;
      else
        for (int rep = 0; rep < -dp.d; ++rep) val *= Et;
    }
    Qs.push_back(val);
  }
  double spread = 0.0;
  for (size_t i = 1; i < Qs.size(); ++i)
    spread = std::max(spread, std::abs(Qs[i] - Qs[0]) / std::abs(Qs[0]));
  out.Q = Qs.front();
  out.Q_spread = spread;
  if (spread > q_tol)
    fail(ErrCode::QNotConstant, "Q factor varies across sample points");

  // assemble tau_B^{3/2}
  cplx expo = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      expo += b1[i] * cv.omega().omega[i][j] * b1[j];
  cplx val = std::pow(out.Q, 0.5 * double(g - 1)) *
             std::exp(-0.25 * kPi * cplx(0, 1) * expo);
  for (size_t a = 0; a < c.divisor().size(); ++a)
    for (size_t b = 0; b < c.divisor().size(); ++b) {
      if (a == b) continue;
      cvec z(g);
      for (int j = 0; j < g; ++j)
        z[j] = c.divisor()[a].abel[j] - c.divisor()[b].abel[j];
      cplx Et = theta_char(odd, z, cv.omega(), 1e-13) /
                (c.divisor()[a].h_ref * std::sqrt(out.jacobians[a]) *
                 c.divisor()[b].h_ref * std::sqrt(out.jacobians[b]));
      int e = c.divisor()[a].d * c.divisor()[b].d;
      if (e >= 0)
        for (int rep = 0; rep < e; ++rep) val *= Et;
      else
        for (int rep = 0; rep < -e; ++rep) val /= Et;
    }
  out.value = val;
  return out;
}

DimensionCount dimension_count(int g, int m, int n, const std::vector<int>& orders) {
  if (static_cast<int>(orders.size()) != m)
    fail(ErrCode::BadInput, "orders size must equal m");
  int rsum = 0;
  for (int r : orders) rsum += r;
  if (n - rsum != 1 - g)
    fail(ErrCode::InconsistentProfile, "n - sum r = 1 - g violated");
  DimensionCount d;
  d.parameters = 2 * g - 3 + n + m;
  d.conditions = 2 * g + n - 1;
  d.dimension = m - 2;
  return d;
}

Config random_config(std::shared_ptr<const Curve> curve,
                     const std::vector<int>& orders, std::mt19937_64& rng) {
  const Curve& cv = *curve;
  int g = cv.genus();
  int rsum = 0;
  for (int r : orders) rsum += r;
  int n = rsum + 1 - g;
  if (n < g) fail(ErrCode::BadInput, "need at least g zeros for inversion");

  cplx centroid = 0.0;
  for (cplx e : cv.branch_points()) centroid += e;
  centroid /= double(cv.branch_points().size());
  double rad = 0.0;
  for (cplx e : cv.branch_points())
    rad = std::max(rad, std::abs(e - centroid));

  std::uniform_real_distribution<double> U(-1.25, 1.25);
  std::uniform_int_distribution<int> H(0, 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<SurfacePoint> poles, zeros;
    auto fresh = [&]() -> SurfacePoint {
      for (int t = 0; t < 200; ++t) {
        cplx x = centroid + rad * cplx(U(rng), U(rng));
        bool ok = true;
        for (cplx e : cv.branch_points())
          if (std::abs(x - e) < 1.1 * cv.branch_clearance()) ok = false;
        for (const auto& q : poles)
          if (std::abs(q.x - x) < 0.5 * cv.branch_clearance()) ok = false;
        for (const auto& q : zeros)
          if (std::abs(q.x - x) < 0.5 * cv.branch_clearance()) ok = false;
        if (ok) return SurfacePoint::make(cv.P(), x, H(rng) ? 1 : -1);
      }
      fail(ErrCode::DegenerateConfig, "could not place divisor points");
    };
    try {
      for (size_t j = 0; j < orders.size(); ++j) poles.push_back(fresh());
      for (int i = 0; i < n - g; ++i) zeros.push_back(fresh());
      // canonicity target: A(D) = K + Omega b1 + b2 for a random half pair
      cvec w(g, 0.0);
      for (int j = 0; j < g; ++j) w[j] = cv.K_base()[j];
      std::vector<double> tb1(g), tb2(g);
      for (int j = 0; j < g; ++j) {
        tb1[j] = H(rng) ? 0.5 : 0.0;
        tb2[j] = H(rng) ? 0.5 : 0.0;
      }
      for (int i = 0; i < g; ++i) {
        w[i] += tb2[i];
        for (int j = 0; j < g; ++j) w[i] += cv.omega().omega[i][j] * tb1[j];
      }
      for (size_t j = 0; j < poles.size(); ++j) {
        cvec A = cv.abel(poles[j]);
        for (int i = 0; i < g; ++i) w[i] += double(orders[j]) * A[i];
      }
      for (const auto& z : zeros) {
        cvec A = cv.abel(z);
        for (int i = 0; i < g; ++i) w[i] -= A[i];
      }
      auto rest = cv.jacobi_inversion(w, rng());
      bool ok = true;
      for (const auto& z : rest) {
        for (cplx e : cv.branch_points())
          if (std::abs(z.x - e) < 0.8 * cv.branch_clearance()) ok = false;
        for (const auto& q : poles)
          if (std::abs(q.x - z.x) < 0.3 * cv.branch_clearance() &&
              std::abs(q.y - z.y) < 0.3) ok = false;
        for (const auto& q : zeros)
          if (std::abs(q.x - z.x) < 0.3 * cv.branch_clearance() &&
              std::abs(q.y - z.y) < 0.3) ok = false;
      }
      if (!ok) continue;
      for (const auto& z : rest) zeros.push_back(z);
      return Config(curve, zeros, poles, orders);
    } catch (const Error&) {
      continue;
    }
  }
  fail(ErrCode::DegenerateConfig, "admissible configuration generation failed");
}

}  // namespace genusg
}  // namespace bethe
