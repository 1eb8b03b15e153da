#include "core/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bethe {
namespace hyper {

namespace {

cplx principal_sqrt(cplx v) { return std::sqrt(v); }

// winding number of a closed polyline around p
int winding_number(const std::vector<cplx>& xs, cplx p) {
  double total = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    cplx a = xs[i] - p, b = xs[(i + 1) % xs.size()] - p;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

// closed stadium-shaped polyline around the segment [a, b] at offset rho
std::vector<cplx> stadium(cplx a, cplx b, double rho) {
  std::vector<cplx> out;
  cplx t = b - a;
  if (std::abs(t) < 1e-14) t = 1.0;
  cplx th = t / std::abs(t);
  cplx nh = th * cplx(0, 1);
  const int arc = 8;
  out.push_back(a + rho * nh);
  out.push_back(b + rho * nh);
  for (int s = 1; s < arc; ++s)
    out.push_back(b + rho * nh * std::exp(cplx(0, -kPi * s / arc)));
  out.push_back(b - rho * nh);
  out.push_back(a - rho * nh);
  for (int s = 1; s < arc; ++s)
    out.push_back(a - rho * nh * std::exp(cplx(0, -kPi * s / arc)));
  return out;
}

// closed tube-shaped polyline around the chain v_0..v_{k-1} at offset rho,
// with miter joins at interior vertices (safe for turn angles < ~120 deg)
std::vector<cplx> tube(const std::vector<cplx>& v, double rho) {
  size_t k = v.size();
  if (k == 2) return stadium(v[0], v[1], rho);
  auto normal = [&](size_t i) {
    cplx t = v[i + 1] - v[i];
    return (t / std::abs(t)) * cplx(0, 1);
  };
  auto miter = [&](size_t i, double side) {
    cplx n1 = normal(i - 1) * side, n2 = normal(i) * side;
    cplx m = n1 + n2;
    double mm = std::abs(m);
    if (mm < 0.2)
      fail(ErrCode::CycleEncodingInvalid, "chain turn too sharp for the tube");
    cplx mh = m / mm;
    double c = (mh * std::conj(n2)).real();  // cos(theta/2)
    return v[i] + (rho / c) * mh;
  };
  std::vector<cplx> out;
  out.push_back(v[0] + rho * normal(0));
  for (size_t i = 1; i + 1 < k; ++i) out.push_back(miter(i, +1.0));
  out.push_back(v[k - 1] + rho * normal(k - 2));
  // cap at the far end: half circle from +n to -n through the forward side
  {
    cplx n = normal(k - 2);
    double a0 = std::arg(n);
    const int arc = 8;
    for (int s = 1; s < arc; ++s)
      out.push_back(v[k - 1] + rho * std::exp(cplx(0, a0 - kPi * s / arc)));
  }
  out.push_back(v[k - 1] - rho * normal(k - 2));
  for (size_t i = k - 2; i >= 1; --i) out.push_back(miter(i, -1.0));
  out.push_back(v[0] - rho * normal(0));
  // cap at v_0 back to the start
  {
    cplx n = normal(0);
    double a0 = std::arg(-n);
    const int arc = 8;
    for (int s = 1; s < arc; ++s)
      out.push_back(v[0] + rho * std::exp(cplx(0, a0 - kPi * s / arc)));
  }
  return out;
}

}  // namespace

SurfacePoint SurfacePoint::make(const Poly& P, cplx x, int sheet) {
  SurfacePoint p;
  p.x = x;
  p.sheet = sheet;
  p.y = double(sheet) * principal_sqrt(P.eval(x));
  return p;
}

SurfacePoint SurfacePoint::infinity(int sheet) {
  SurfacePoint p;
  p.infinite = true;
  p.sheet = sheet;
  return p;
}

cplx continue_y(const Poly& P, cplx a, cplx y_a, cplx b) {
  cplx cur = y_a;
  cplx pv = P.eval(a);
  double t = 0.0, dt = 1.0;
  int guard = 0;
  while (t < 1.0) {
    if (++guard > 200000)
      fail(ErrCode::BranchTrackingFailure, "y continuation stalled");
    double tn = std::min(1.0, t + dt);
    cplx xn = a + tn * (b - a);
    cplx pn = P.eval(xn);
    if (std::abs(pn) == 0.0)
      fail(ErrCode::BranchTrackingFailure, "path hits a branch point");
    cplx ratio = pn / pv;
    double da = std::abs(std::arg(ratio));
    if (da > kPi / 4.0 && dt > 1e-12) {
      dt *= 0.5;
      continue;
    }
    cur *= principal_sqrt(ratio);
    pv = pn;
    t = tn;
    if (da < kPi / 16.0) dt = std::min(1.0, dt * 2.0);
  }
  return cur;
}

SurfacePoint Chart::point(cplx xi) const {
  SurfacePoint p;
  if (kind == Kind::Infinity) {
    if (std::abs(xi) == 0.0) return SurfacePoint::infinity(inf_sign);
    // x = 1/s, y = sign * sqrt(R(s)) / s^{g+1} with R(s) = s^deg P(1/s)
    int deg = P->degree();
    int gp1 = deg / 2;  // g + 1 for even degree
    std::vector<cplx> rc(P->coeffs().rbegin(), P->coeffs().rend());
    Poly R(rc);
    cplx sq = principal_sqrt(R.coeff(0));
    cplx pv = R.coeff(0);
    const int steps = 24;
    for (int k = 1; k <= steps; ++k) {
      cplx sk = xi * (double(k) / steps);
      cplx pn = R.eval(sk);
      sq *= principal_sqrt(pn / pv);
      pv = pn;
    }
    p.x = 1.0 / xi;
    p.y = double(inf_sign) * sq / std::pow(xi, gp1);
    cplx pr = principal_sqrt(P->eval(p.x));
    p.sheet = (std::abs(p.y - pr) <= std::abs(p.y + pr)) ? +1 : -1;
    return p;
  }
  if (kind == Kind::Affine) {
    p.x = center_x + xi;
    p.y = (std::abs(xi) == 0.0) ? center_y : continue_y(*P, center_x, center_y, p.x);
  } else {
    p.x = center_x + xi * xi;
    if (std::abs(xi) == 0.0) {
      p.y = 0.0;
    } else {
      Poly q, r;
      Poly::divmod(*P, Poly({-center_x, 1.0}), q, r);
      cplx s = principal_sqrt(q.eval(center_x));
      cplx pv = q.eval(center_x);
      const int steps = 24;
      for (int k = 1; k <= steps; ++k) {
        cplx xk = center_x + std::pow(xi * (double(k) / steps), 2);
        cplx pn = q.eval(xk);
        s *= principal_sqrt(pn / pv);
        pv = pn;
      }
      p.y = xi * s;
    }
  }
  cplx pr = principal_sqrt(P->eval(p.x));
  p.sheet = (std::abs(p.y - pr) <= std::abs(p.y + pr)) ? +1 : -1;
  return p;
}

cplx Chart::dx_dxi(cplx xi) const {
  if (kind == Kind::Affine) return 1.0;
  if (kind == Kind::Branch) return 2.0 * xi;
  return -1.0 / (xi * xi);
}

// ---------------------------------------------------------------------------

Curve::Curve(Poly P, double tol) : P_(std::move(P)), tol_(tol) {
  int deg = P_.degree();
  if (deg < 3 || deg > 6) fail(ErrCode::BadInput, "P must have degree 3..6");
  g_ = (deg - 1) / 2;  // 3,4 -> 1; 5,6 -> 2
  branch_ = poly_roots(P_);
  infinity_branch_ = (deg % 2 == 1);
  double scale = 1.0;
  for (cplx e : branch_) scale = std::max(scale, std::abs(e));
  double dmin = 1e300;
  for (size_t i = 0; i < branch_.size(); ++i)
    for (size_t j = i + 1; j < branch_.size(); ++j)
      dmin = std::min(dmin, std::abs(branch_[i] - branch_[j]));
  if (dmin < 1e-8 * scale) fail(ErrCode::BadInput, "P must have simple roots");
  clearance_ = std::min(0.35 * dmin, 0.5 * scale);

  cplx centroid = 0.0;
  for (cplx e : branch_) centroid += e;
  centroid /= double(branch_.size());
  cplx view = centroid + scale * cplx(0.2331, 0.1279);
  for (int attempt = 0; attempt < 32; ++attempt) {
    bool ok = true;
    for (cplx e : branch_)
      if (std::abs(e - view) < 0.3 * dmin) ok = false;
    if (ok) break;
    view += scale * cplx(0.0731, -0.0457);
  }
  std::sort(branch_.begin(), branch_.end(), [&](cplx a, cplx b) {
    return std::arg(a - view) < std::arg(b - view);
  });

  double rad = 0.0;
  for (cplx e : branch_) rad = std::max(rad, std::abs(e - centroid));
  cplx dir = cplx(1.13, 0.71) / std::abs(cplx(1.13, 0.71));
  base_ = SurfacePoint::make(P_, centroid + (rad + 4.0 * clearance_) * dir, +1);

  build_cycles();
  compute_periods();
  fix_orientations();
  select_odd_characteristics();
  select_K_base();
}

void Curve::build_cycles() {
  int nb = static_cast<int>(branch_.size());
  auto others_distance = [&](const std::vector<cplx>& used) {
    double d = 1e300;
    for (cplx e : branch_) {
      bool in_used = false;
      for (cplx u : used)
        if (std::abs(u - e) < 1e-14) in_used = true;
      if (in_used) continue;
      for (cplx u : used) d = std::min(d, std::abs(u - e));
    }
    return d;
  };
  for (int i = 0; i < g_; ++i) {
    cplx u = branch_[2 * i], v = branch_[2 * i + 1];
    double rho = 0.4 * std::min(others_distance({u, v}), 3.0 * clearance_);
    TrackedPath p;
    p.xs = stadium(u, v, rho);
    p.closed = true;
    a_cycles_.push_back(std::move(p));
  }
  for (int i = 0; i < g_; ++i) {
    // chain from e_{2i+1} (0-based) through e_{2g} inclusive
    std::vector<cplx> chain;
    for (int j = 2 * i + 1; j <= std::min(2 * g_, nb - 1); ++j)
      chain.push_back(branch_[j]);
    double rho = 0.4 * std::min(others_distance(chain), 3.0 * clearance_);
    TrackedPath p;
    p.xs = tube(chain, rho);
    p.closed = true;
    b_cycles_.push_back(std::move(p));
    for (int j = 0; j < nb; ++j) {
      bool should = (j >= 2 * i + 1 && j <= 2 * g_);
      int w = winding_number(b_cycles_.back().xs, branch_[j]);
      if ((should && std::abs(w) != 1) || (!should && w != 0))
        fail(ErrCode::CycleEncodingInvalid, "b-cycle winding check failed");
    }
  }
  for (int i = 0; i < g_; ++i) {
    for (int j = 0; j < nb; ++j) {
      bool should = (j == 2 * i || j == 2 * i + 1);
      int w = winding_number(a_cycles_[i].xs, branch_[j]);
      if ((should && std::abs(w) != 1) || (!should && w != 0))
        fail(ErrCode::CycleEncodingInvalid, "a-cycle winding check failed");
    }
  }
  for (auto* fam : {&a_cycles_, &b_cycles_}) {
    for (auto& cyc : *fam) {
      auto conn = avoiding_path(base_.x, cyc.xs.front());
      cplx y = base_.y;
      for (size_t i = 0; i + 1 < conn.size(); ++i)
        y = continue_y(P_, conn[i], y, conn[i + 1]);
      cyc.y_start = y;
    }
  }
}

std::vector<cplx> Curve::avoiding_path(cplx from, cplx to) const {
  std::vector<cplx> path{from};
  cplx cur = from;
  int guard = 0;
  while (std::abs(cur - to) > 1e-15 && ++guard < 64) {
    cplx dir = to - cur;
    double len = std::abs(dir);
    if (len < 1e-15) break;
    dir /= len;
    double best_t = 1e300;
    cplx conflict = 0.0;
    bool has_conflict = false;
    for (cplx e : branch_) {
      // endpoint approaches are deliberate (staging points hug their branch
      // point); never detour around a branch point the path is aiming at
      if (std::abs(e - to) < 0.95 * clearance_) continue;
      if (std::abs(e - from) < 0.95 * clearance_) continue;
      cplx rel = e - cur;
      double t = (rel * std::conj(dir)).real();
      if (t <= 1e-12 || t >= len - 1e-12) continue;
      double d = std::abs(rel - t * dir);
      if (d < 0.8 * clearance_ && t < best_t) {
        best_t = t;
        conflict = e;
        has_conflict = true;
      }
    }
    if (!has_conflict) break;
    cplx n = dir * cplx(0, 1);
    cplx q = cur + best_t * dir;
    double off = 1.2 * clearance_;
    // keep the bump clear of every other branch point as well
    for (int side = 0; side < 2; ++side) {
      cplx w1 = q - clearance_ * dir + off * n;
      cplx w2 = q + clearance_ * dir + off * n;
      bool ok = true;
      for (cplx e : branch_)
        if (std::abs(e - w1) < 0.5 * clearance_ || std::abs(e - w2) < 0.5 * clearance_)
          ok = false;
      if (ok) {
        path.push_back(w1);
        path.push_back(w2);
        cur = w2;
        break;
      }
      n = -n;  // try the other side
      if (side == 1) {
        off *= 1.7;
        side = -1;
        if (off > 20.0 * clearance_)
          fail(ErrCode::BranchClearance, "could not route around branch points");
      }
    }
  }
  path.push_back(to);
  return path;
}

std::vector<cplx> Curve::integrate_tracked(
    const TrackedPath& path, int dim,
    const std::function<std::vector<cplx>(cplx, cplx)>& f, double tol,
    cplx* y_end) const {
  std::vector<cplx> total(dim, 0.0);
  std::vector<cplx> xs = path.xs;
  if (path.closed) xs.push_back(xs.front());
  size_t nedges = xs.size() - 1;

  const auto& [gx, gw] = gauss_legendre(16);
  auto eval_panel = [&](cplx aa, cplx bb, cplx yaa, std::vector<cplx>& out) -> cplx {
    cplx ycur = yaa;
    cplx xprev = aa;
    out.assign(dim, 0.0);
    for (int i = 0; i < 16; ++i) {
      cplx xn = aa + (bb - aa) * (0.5 + 0.5 * gx[i]);
      ycur = continue_y(P_, xprev, ycur, xn);
      auto v = f(xn, ycur);
      for (int k = 0; k < dim; ++k) out[k] += v[k] * (bb - aa) * (0.5 * gw[i]);
      xprev = xn;
    }
    return continue_y(P_, xprev, ycur, bb);
  };

  std::function<void(cplx, cplx, cplx&, double, int)> panel =
      [&](cplx a, cplx b, cplx& ya, double ptol, int depth) {
        std::vector<cplx> whole, left, right;
        eval_panel(a, b, ya, whole);
        cplx mid = 0.5 * (a + b);
        cplx ymid = eval_panel(a, mid, ya, left);
        cplx yb = eval_panel(mid, b, ymid, right);
        double err = 0.0, mag = 0.0;
        for (int k = 0; k < dim; ++k) {
          err = std::max(err, std::abs(whole[k] - left[k] - right[k]));
          mag = std::max(mag, std::abs(left[k] + right[k]));
        }
        if (err <= ptol * std::max(1.0, mag) || depth >= 18) {
          if (err > ptol * std::max(1.0, mag) && depth >= 18)
            fail(ErrCode::NonConvergence, "tracked quadrature depth cap");
          for (int k = 0; k < dim; ++k) total[k] += left[k] + right[k];
          ya = yb;
          return;
        }
        panel(a, mid, ya, ptol * 0.6, depth + 1);
        panel(mid, b, ya, ptol * 0.6, depth + 1);
      };

  cplx y = path.y_start;
  double edge_tol = tol / std::max<size_t>(1, nedges);
  for (size_t e = 0; e + 1 < xs.size(); ++e) {
    if (std::abs(xs[e + 1] - xs[e]) < 1e-15) continue;
    panel(xs[e], xs[e + 1], y, edge_tol, 0);
  }
  if (y_end) *y_end = y;
  return total;
}

void Curve::compute_periods() {
  int g = g_;
  auto wforms = [&](cplx x, cplx y) {
    std::vector<cplx> v(g);
    cplx p = 1.0;
    for (int k = 0; k < g; ++k) {
      v[k] = p / y;
      p *= x;
    }
    return v;
  };
  A_raw_.assign(g, cvec(g));
  B_raw_.assign(g, cvec(g));
  for (int i = 0; i < g; ++i) {
    cplx ya = 0.0, yb = 0.0;
    auto A = integrate_tracked(a_cycles_[i], g, wforms, tol_, &ya);
    auto B = integrate_tracked(b_cycles_[i], g, wforms, tol_, &yb);
    if (std::abs(ya - a_cycles_[i].y_start) > 1e-6 * (1.0 + std::abs(ya)) ||
        std::abs(yb - b_cycles_[i].y_start) > 1e-6 * (1.0 + std::abs(yb)))
      fail(ErrCode::CycleEncodingInvalid, "cycle lift did not close");
    for (int k = 0; k < g; ++k) {
      A_raw_[i][k] = A[k];
      B_raw_[i][k] = B[k];
    }
  }
}

void Curve::fix_orientations() {
  int g = g_;
  auto omega_of = [&](const std::vector<int>& ea, const std::vector<int>& eb) {
    cmat A = A_raw_, B = B_raw_;
    for (int i = 0; i < g; ++i)
      for (int k = 0; k < g; ++k) {
        A[i][k] *= double(ea[i]);
        B[i][k] *= double(eb[i]);
      }
    auto Ainv = invert_dense(A);
    cmat Om(g, cvec(g, 0.0));
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) Om[i][j] += B[i][k] * Ainv[k][j];
    return Om;
  };
  std::vector<int> best_ea, best_eb;
  bool found = false;
  for (int ca = 0; ca < (1 << g) && !found; ++ca)
    for (int cb = 0; cb < (1 << g) && !found; ++cb) {
      std::vector<int> ea(g), eb(g);
      for (int i = 0; i < g; ++i) {
        ea[i] = (ca >> i) & 1 ? -1 : 1;
        eb[i] = (cb >> i) & 1 ? -1 : 1;
      }
      cmat Om;
      try {
        Om = omega_of(ea, eb);
      } catch (const Error&) {
        continue;
      }
      double scale = 0.0, asym = 0.0;
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) scale = std::max(scale, std::abs(Om[i][j]));
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
          asym = std::max(asym, std::abs(Om[i][j] - Om[j][i]));
      if (asym > 1e-6 * std::max(1.0, scale)) continue;
      std::vector<std::vector<double>> Y(g, std::vector<double>(g));
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
          Y[i][j] = 0.5 * (Om[i][j].imag() + Om[j][i].imag());
      if (sym_eigenvalues(Y).front() <= 0.0) continue;
      best_ea = ea;
      best_eb = eb;
      found = true;
    }
  if (!found)
    fail(ErrCode::CycleEncodingInvalid, "no orientation yields a Riemann matrix");

  auto flip = [&](TrackedPath& p) {
    std::reverse(p.xs.begin(), p.xs.end());
    // closed loop: tracked y returns to the start, y_start stays valid
  };
  for (int i = 0; i < g; ++i) {
    if (best_ea[i] < 0) {
      flip(a_cycles_[i]);
      for (int k = 0; k < g; ++k) A_raw_[i][k] = -A_raw_[i][k];
    }
    if (best_eb[i] < 0) {
      flip(b_cycles_[i]);
      for (int k = 0; k < g; ++k) B_raw_[i][k] = -B_raw_[i][k];
    }
  }
  coef_ = invert_dense(A_raw_);
  cmat Om(g, cvec(g, 0.0));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k) Om[i][j] += B_raw_[i][k] * coef_[k][j];
  for (int i = 0; i < g; ++i)
    for (int j = i + 1; j < g; ++j) {
      cplx s = 0.5 * (Om[i][j] + Om[j][i]);
      Om[i][j] = Om[j][i] = s;
    }
  omega_ = std::make_unique<PeriodMatrix>(Om);
}

cvec Curve::v_dx(cplx x, cplx y) const {
  int g = g_;
  cvec out(g, 0.0);
  cplx p = 1.0;
  for (int k = 0; k < g; ++k) {
    for (int j = 0; j < g; ++j) out[j] += coef_[k][j] * p / y;
    p *= x;
  }
  return out;
}

cvec Curve::v_chart(const Chart& ch, cplx xi) const {
  int g = g_;
  if (ch.kind == Chart::Kind::Infinity) {
    if (P_.degree() % 2 != 0)
      fail(ErrCode::UnsupportedOrder, "infinity chart needs an even-degree model");
    std::vector<cplx> rc(P_.coeffs().rbegin(), P_.coeffs().rend());
    Poly R(rc);
    cplx sq = principal_sqrt(R.coeff(0));
    if (std::abs(xi) > 0.0) {
      cplx pv = R.coeff(0);
      const int steps = 24;
      for (int k = 1; k <= steps; ++k) {
        cplx sk = xi * (double(k) / steps);
        cplx pn = R.eval(sk);
        sq *= principal_sqrt(pn / pv);
        pv = pn;
      }
    }
    cvec out(g, 0.0);
    for (int k = 0; k < g; ++k) {
      // x^k dx / y = -(s^{g-1-k}) ds / sqrt(R)
      cplx spow = 1.0;
      for (int rep = 0; rep < g - 1 - k; ++rep) spow *= xi;
      for (int j = 0; j < g; ++j)
        out[j] += -double(ch.inf_sign) * coef_[k][j] * spow / sq;
    }
    return out;
  }
  if (ch.kind == Chart::Kind::Branch && std::abs(xi) < 1e-14) {
    Poly q, r;
    Poly::divmod(P_, Poly({-ch.center_x, 1.0}), q, r);
    cplx s0 = principal_sqrt(q.eval(ch.center_x));
    cvec out(g, 0.0);
    cplx p = 1.0;
    for (int k = 0; k < g; ++k) {
      for (int j = 0; j < g; ++j) out[j] += coef_[k][j] * 2.0 * p / s0;
      p *= ch.center_x;
    }
    return out;
  }
  SurfacePoint pt = ch.point(xi);
  cvec out = v_dx(pt.x, pt.y);
  cplx jac = ch.dx_dxi(xi);
  for (cplx& v : out) v *= jac;
  return out;
}

Chart Curve::chart_at(const SurfacePoint& p) const {
  Chart ch;
  ch.P = &P_;
  if (p.infinite) {
    ch.kind = Chart::Kind::Infinity;
    ch.inf_sign = p.sheet;
    return ch;
  }
  for (cplx e : branch_)
    if (std::abs(p.x - e) < 1e-10) {
      ch.kind = Chart::Kind::Branch;
      ch.center_x = e;
      ch.center_y = 0.0;
      return ch;
    }
  ch.kind = Chart::Kind::Affine;
  ch.center_x = p.x;
  ch.center_y = p.y;
  return ch;
}

cvec Curve::abel_along(const TrackedPath& path, cplx* y_end) const {
  auto f = [&](cplx x, cplx y) {
    std::vector<cplx> v = v_dx(x, y);
    return v;
  };
  return integrate_tracked(path, g_, f, tol_, y_end);
}

cvec Curve::abel_increment(const Chart& ch, cplx xi) const {
  int g = g_;
  cvec out(g, 0.0);
  if (std::abs(xi) < 1e-15) return out;
  const auto& [gx, gw] = gauss_legendre(32);
  if (ch.kind == Chart::Kind::Affine) {
    cplx y = ch.center_y;
    cplx xprev = ch.center_x;
    for (int i = 0; i < 32; ++i) {
      double t = 0.5 + 0.5 * gx[i];
      cplx xn = ch.center_x + t * xi;
      y = continue_y(P_, xprev, y, xn);
      cvec v = v_dx(xn, y);
      for (int j = 0; j < g; ++j) out[j] += v[j] * xi * (0.5 * gw[i]);
      xprev = xn;
    }
  } else if (ch.kind == Chart::Kind::Branch) {
    Poly q, r;
    Poly::divmod(P_, Poly({-ch.center_x, 1.0}), q, r);
    cplx s = principal_sqrt(q.eval(ch.center_x));
    cplx pv = q.eval(ch.center_x);
    double tprev = 0.0;
    for (int i = 0; i < 32; ++i) {
      double t = 0.5 + 0.5 * gx[i];
      const int sub = 4;
      for (int ssub = 1; ssub <= sub; ++ssub) {
        double tt = tprev + (t - tprev) * ssub / sub;
        cplx xk = ch.center_x + std::pow(xi * tt, 2);
        cplx pn = q.eval(xk);
        s *= principal_sqrt(pn / pv);
        pv = pn;
      }
      cplx xt = ch.center_x + std::pow(xi * t, 2);
      cplx yt = xi * t * s;
      cvec v = v_dx(xt, yt);
      cplx w = 2.0 * t * xi * xi;
      for (int j = 0; j < g; ++j) out[j] += v[j] * w * (0.5 * gw[i]);
      tprev = t;
    }
  } else {
    // infinity chart: integrate v|_s along the s-radial from 0 to xi using
    // the closed-form chart expression (regular at s = 0)
    for (int i = 0; i < 32; ++i) {
      double t = 0.5 + 0.5 * gx[i];
      cvec v = v_chart(ch, xi * t);
      for (int j = 0; j < g; ++j) out[j] += v[j] * xi * (0.5 * gw[i]);
    }
  }
  return out;
}

cvec Curve::abel(const SurfacePoint& p) const {
  if (p.infinite) {
    if (P_.degree() % 2 != 0)
      fail(ErrCode::UnsupportedOrder, "infinite points need an even-degree model");
    // staging point far outside the branch cluster, radial in s afterwards
    cplx centroid = 0.0;
    for (cplx e : branch_) centroid += e;
    centroid /= double(branch_.size());
    double rad = 1.0;
    for (cplx e : branch_) rad = std::max(rad, std::abs(e - centroid));
    cplx dir = (base_.x - centroid) / std::abs(base_.x - centroid);
    cplx xst = centroid + 3.0 * (rad + 4.0 * clearance_) * dir;
    auto path = avoiding_path(base_.x, xst);
    cplx yst = base_.y;
    for (size_t i = 0; i + 1 < path.size(); ++i)
      yst = continue_y(P_, path[i], yst, path[i + 1]);
    TrackedPath tp{path, base_.y, false};
    cvec A = abel_along(tp);
    Chart ch;
    ch.kind = Chart::Kind::Infinity;
    ch.P = &P_;
    ch.inf_sign = p.sheet;
    cplx sst = 1.0 / xst;
    SurfacePoint probe = ch.point(sst);
    if (std::abs(probe.y - yst) > std::abs(probe.y + yst)) {
      // the requested infinite branch lives on the other lift: go through
      // the involution shift below by flipping the chart sign
      ch.inf_sign = -p.sheet;
      probe = ch.point(sst);
      if (std::abs(probe.y - yst) > std::abs(probe.y + yst))
        fail(ErrCode::BranchTrackingFailure, "infinity chart mismatch");
      cvec inc = abel_increment(ch, sst);
      for (int j = 0; j < g_; ++j) A[j] -= inc[j];
      // A now holds Abel of the involuted target
      cvec shift = involution_shift();
      cvec out(g_);
      for (int j = 0; j < g_; ++j) out[j] = shift[j] - A[j];
      return out;
    }
    cvec inc = abel_increment(ch, sst);  // A(xst) - A(inf)
    for (int j = 0; j < g_; ++j) A[j] -= inc[j];
    return A;
  }
  for (cplx e : branch_) {
    if (std::abs(p.x - e) < 1e-10) {
      Chart ch;
      ch.kind = Chart::Kind::Branch;
      ch.center_x = e;
      ch.center_y = 0.0;
      ch.P = &P_;
      cplx dir = base_.x - e;
      dir /= std::abs(dir);
      cplx q = e + 0.6 * clearance_ * dir;
      auto path = avoiding_path(base_.x, q);
      cplx yq = base_.y;
      for (size_t i = 0; i + 1 < path.size(); ++i)
        yq = continue_y(P_, path[i], yq, path[i + 1]);
      TrackedPath tp{path, base_.y, false};
      cvec A = abel_along(tp);
      cplx t_q = principal_sqrt(q - e);
      SurfacePoint probe = ch.point(t_q);
      if (std::abs(probe.y - yq) > std::abs(probe.y + yq)) t_q = -t_q;
      cvec inc = abel_increment(ch, t_q);  // A(q) - A(e)
      for (int j = 0; j < g_; ++j) A[j] -= inc[j];
      return A;
    }
  }
  auto path = avoiding_path(base_.x, p.x);
  TrackedPath tp{path, base_.y, false};
  cplx yend = 0.0;
  cvec A = abel_along(tp, &yend);
  if (std::abs(yend - p.y) <= std::abs(yend + p.y)) return A;
  // wrong sheet: A(sigma p) = shift - A(p), shift = Abel of the involuted base
  cvec shift = involution_shift();
  cvec out(g_);
  for (int j = 0; j < g_; ++j) out[j] = shift[j] - A[j];
  return out;
}

const cvec& Curve::involution_shift() const {
  if (inv_shift_.empty()) {
    cplx e = branch_[0];
    cplx dir = base_.x - e;
    dir /= std::abs(dir);
    cplx q = e + 0.6 * clearance_ * dir;
    auto out_path = avoiding_path(base_.x, q);
    std::vector<cplx> full = out_path;
    for (int s = 1; s <= 24; ++s)
      full.push_back(e + (q - e) * std::exp(cplx(0, 2.0 * kPi * s / 24.0)));
    for (auto it = out_path.rbegin() + 1; it != out_path.rend(); ++it)
      full.push_back(*it);
    TrackedPath sp{full, base_.y, false};
    cplx ycheck = 0.0;
    inv_shift_ = abel_along(sp, &ycheck);
    if (std::abs(ycheck + base_.y) > 1e-6 * (1.0 + std::abs(base_.y)))
      fail(ErrCode::BranchTrackingFailure, "involution loop did not flip the sheet");
  }
  return inv_shift_;
}

cvec Curve::K_of_abel(const cvec& abel_x) const {
  cvec K = K_base_;
  for (int j = 0; j < g_; ++j) K[j] += double(g_ - 1) * abel_x[j];
  return K;
}

cvec Curve::lattice_reduce(const cvec& t, std::vector<long>* m_out,
                           std::vector<long>* k_out) const {
  int g = g_;
  const auto& Y = omega_->im();
  std::vector<std::vector<cplx>> Yc(g, std::vector<cplx>(g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) Yc[i][j] = Y[i][j];
  std::vector<cplx> rhs(g);
  for (int i = 0; i < g; ++i) rhs[i] = t[i].imag();
  auto sol = solve_dense(Yc, rhs);
  std::vector<long> m(g), k(g);
  cvec out(g);
  for (int i = 0; i < g; ++i) m[i] = std::lround(sol[i].real());
  for (int i = 0; i < g; ++i) {
    cplx v = t[i];
    for (int j = 0; j < g; ++j) v -= omega_->omega[i][j] * double(m[j]);
    k[i] = std::lround(v.real());
    out[i] = v - double(k[i]);
  }
  if (m_out) *m_out = m;
  if (k_out) *k_out = k;
  return out;
}

void Curve::select_odd_characteristics() {
  auto all = all_half_characteristics(g_);
  for (const auto& ch : all) {
    if (ch.parity() != 1) continue;
    cvec zero(g_, 0.0);
    cvec grad(g_);
    double norm = 0.0;
    for (int j = 0; j < g_; ++j) {
      grad[j] = theta_char_deriv(ch, j, zero, *omega_, 1e-13);
      norm = std::max(norm, std::abs(grad[j]));
    }
    if (norm > 1e-6) {
      odd_chars_.push_back(ch);
      grad_odd_.push_back(grad);
    }
  }
  if (odd_chars_.empty())
    fail(ErrCode::SingularCharacteristic, "no nonsingular odd characteristic");
}

void Curve::select_K_base() {
  int g = g_;
  cplx xW = branch_[0];
  cvec AW = abel(SurfacePoint::make(P_, xW, +1));
  std::vector<cvec> test_abels;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  cplx centroid = 0.0;
  for (cplx e : branch_) centroid += e;
  centroid /= double(branch_.size());
  double rad = 0.0;
  for (cplx e : branch_) rad = std::max(rad, std::abs(e - centroid));
  int want = 6;
  for (int t = 0; t < 400 && static_cast<int>(test_abels.size()) < want; ++t) {
    cplx x = centroid + 1.4 * rad * cplx(U(rng), U(rng));
    bool clear = true;
    for (cplx e : branch_)
      if (std::abs(x - e) < 0.8 * clearance_) clear = false;
    if (!clear) continue;
    int sheet = (t & 1) ? +1 : -1;
    test_abels.push_back(abel(SurfacePoint::make(P_, x, sheet)));
  }
  auto halves = all_half_characteristics(g);
  double best_score = 1e300;
  cvec best;
  for (const auto& hc : halves) {
    cvec h(g, 0.0);
    for (int i = 0; i < g; ++i) {
      h[i] = hc.b2[i];
      for (int j = 0; j < g; ++j) h[i] += omega_->omega[i][j] * hc.b1[j];
    }
    double score = 0.0;
    for (const auto& Ap : test_abels) {
      cvec z(g);
      for (int i = 0; i < g; ++i) z[i] = h[i] + double(g - 1) * (Ap[i] - AW[i]);
      score = std::max(score, std::abs(theta(z, *omega_, 1e-12)));
    }
    if (score < best_score) {
      best_score = score;
      best = h;
    }
  }
  if (best_score > 1e-5)
    fail(ErrCode::ValidationFailed, "no half-period passes the vanishing test");
  K_base_.assign(g, 0.0);
  for (int i = 0; i < g; ++i) K_base_[i] = best[i] - double(g - 1) * AW[i];
}

cplx Curve::sqspinor_chart(int delta, const Chart& ch, cplx xi) const {
  cvec v = v_chart(ch, xi);
  cplx G = 0.0;
  for (int j = 0; j < g_; ++j) G += grad_odd_[delta][j] * v[j];
  return G;
}

cplx Curve::prime_form(const SurfacePoint& p, const SurfacePoint& q,
                       int delta) const {
  Chart cp = chart_at(p), cq = chart_at(q);
  if (delta < 0) {
    for (size_t d = 0; d < odd_chars_.size(); ++d) {
      double scale = 0.0;
      for (int j = 0; j < g_; ++j)
        scale = std::max(scale, std::abs(grad_odd_[d][j]));
      cplx Gp = sqspinor_chart(int(d), cp, 0.0);
      cplx Gq = sqspinor_chart(int(d), cq, 0.0);
      double vp = 0.0, vq = 0.0;
      for (const cplx& v : v_chart(cp, 0.0)) vp = std::max(vp, std::abs(v));
      for (const cplx& v : v_chart(cq, 0.0)) vq = std::max(vq, std::abs(v));
      if (std::abs(Gp) > 1e-5 * scale * std::max(vp, 1e-30) &&
          std::abs(Gq) > 1e-5 * scale * std::max(vq, 1e-30)) {
        delta = int(d);
        break;
      }
    }
    if (delta < 0)
      fail(ErrCode::SingularCharacteristic, "no safe odd characteristic");
  }
  cvec Ap = abel(p), Aq = abel(q);
  cvec z(g_);
  for (int j = 0; j < g_; ++j) z[j] = Ap[j] - Aq[j];
  cplx th = theta_char(odd_chars_[delta], z, *omega_, 1e-13);
  cplx hp = principal_sqrt(sqspinor_chart(delta, cp, 0.0));
  cplx hq = principal_sqrt(sqspinor_chart(delta, cq, 0.0));
  return th / (hp * hq);
}

cplx Curve::c_differential(const Chart& ch, cplx xi, const cvec& abel_center) const {
  int g = g_;
  cvec Ax = abel_center;
  cvec inc = abel_increment(ch, xi);
  for (int j = 0; j < g; ++j) Ax[j] += inc[j];
  cvec Kx = K_of_abel(Ax);

  cvec v = v_chart(ch, xi);
  cplx num = 0.0;
  if (g == 1) {
    num = theta_deriv({1}, Kx, *omega_, 1e-13) * v[0];
  } else if (g == 2) {
    cplx t20 = theta_deriv({2, 0}, Kx, *omega_, 1e-13);
    cplx t11 = theta_deriv({1, 1}, Kx, *omega_, 1e-13);
    cplx t02 = theta_deriv({0, 2}, Kx, *omega_, 1e-13);
    num = t20 * v[0] * v[0] + 2.0 * t11 * v[0] * v[1] + t02 * v[1] * v[1];
  } else {
    fail(ErrCode::UnsupportedOrder, "C(x) implemented for genus <= 2");
  }

  cplx den;
  if (g == 1) {
    den = v[0];
  } else {
    double h = 1e-5;
    auto vp = [&](cplx at) { return v_chart(ch, at); };
    auto vph = vp(xi + h), vmh = vp(xi - h);
    auto vph2 = vp(xi + h / 2.0), vmh2 = vp(xi - h / 2.0);
    cvec d1(g);
    for (int j = 0; j < g; ++j) {
      cplx a = (vph[j] - vmh[j]) / (2.0 * h);
      cplx b = (vph2[j] - vmh2[j]) / h;
      d1[j] = (4.0 * b - a) / 3.0;
    }
    den = v[0] * d1[1] - v[1] * d1[0];
  }
  if (std::abs(den) < 1e-12 * (std::abs(num) + 1e-30))
    fail(ErrCode::WronskianZero, "Wronskian vanished in the chart");
  return num / den;
}

std::vector<SurfacePoint> Curve::jacobi_inversion(const cvec& w,
                                                  unsigned long seed) const {
  int g = g_;
  cplx centroid = 0.0;
  for (cplx e : branch_) centroid += e;
  centroid /= double(branch_.size());
  double rad = 0.0;
  for (cplx e : branch_) rad = std::max(rad, std::abs(e - centroid));

  std::vector<SurfacePoint> found;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.2, 1.2);

  auto theta_val = [&](const cvec& A) {
    cvec z(g);
    for (int j = 0; j < g; ++j) z[j] = A[j] - w[j] - K_base_[j];
    return theta(z, *omega_, 1e-13);
  };
  auto theta_grad_dir = [&](const cvec& A, cplx x, cplx y) {
    cvec z(g);
    for (int j = 0; j < g; ++j) z[j] = A[j] - w[j] - K_base_[j];
    cvec v = v_dx(x, y);
    cplx s = 0.0;
    for (int j = 0; j < g; ++j) {
      std::vector<int> alpha(g, 0);
      alpha[j] = 1;
      s += theta_deriv(alpha, z, *omega_, 1e-13) * v[j];
    }
    return s;
  };

  int attempts = 0;
  while (static_cast<int>(found.size()) < g && attempts < 200) {
    ++attempts;
    cplx x0 = centroid + rad * cplx(U(rng), U(rng));
    bool clear = true;
    for (cplx e : branch_)
      if (std::abs(x0 - e) < 0.7 * clearance_) clear = false;
    if (!clear) continue;
    int sheet = (attempts & 1) ? +1 : -1;
    SurfacePoint cur = SurfacePoint::make(P_, x0, sheet);
    cvec A = abel(cur);
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
      cplx f = theta_val(A);
      cplx fp = theta_grad_dir(A, cur.x, cur.y);
      if (std::abs(fp) < 1e-14) break;
      cplx dx = -f / fp;
      double cap = 0.5 * clearance_;
      if (std::abs(dx) > cap) dx *= cap / std::abs(dx);
      cplx xn = cur.x + dx;
      bool near_branch = false;
      for (cplx e : branch_)
        if (std::abs(xn - e) < 0.25 * clearance_) near_branch = true;
      if (near_branch) break;
      Chart ch;
      ch.kind = Chart::Kind::Affine;
      ch.center_x = cur.x;
      ch.center_y = cur.y;
      ch.P = &P_;
      cvec inc = abel_increment(ch, dx);
      for (int j = 0; j < g; ++j) A[j] += inc[j];
      cur.y = continue_y(P_, cur.x, cur.y, xn);
      cur.x = xn;
      if (std::abs(dx) < 1e-11 && std::abs(theta_val(A)) < 1e-9) {
        converged = true;
        break;
      }
    }
    if (!converged) continue;
    cplx pr = principal_sqrt(P_.eval(cur.x));
    cur.sheet = (std::abs(cur.y - pr) <= std::abs(cur.y + pr)) ? +1 : -1;
    bool dup = false;
    for (const auto& f2 : found)
      if (std::abs(f2.x - cur.x) < 1e-7 &&
          std::abs(f2.y - cur.y) < 1e-6 * (1.0 + std::abs(cur.y)))
        dup = true;
    if (!dup) found.push_back(cur);
  }
  if (static_cast<int>(found.size()) != g)
    fail(ErrCode::DegenerateImage, "Jacobi inversion found fewer than g points");
  return found;
}


std::array<cplx, 4> CurveMap::jet(cplx x, cplx y) const {
  Poly P1 = P.derivative();
  Poly P2 = P1.derivative();
  Poly P3 = P2.derivative();
  cplx p1 = P1.eval(x), p2 = P2.eval(x), p3 = P3.eval(x);
  cplx y1 = p1 / (2.0 * y);
  cplx y2 = p2 / (2.0 * y) - p1 * p1 / (4.0 * y * y * y);
  cplx y3 = p3 / (2.0 * y) - 0.75 * p1 * p2 / (y * y * y) +
            0.375 * p1 * p1 * p1 / std::pow(y, 5);
  Rational A1 = A.derivative(), B1 = B.derivative();
  Rational A2 = A1.derivative(), B2 = B1.derivative();
  Rational A3 = A2.derivative(), B3 = B2.derivative();
  cplx b0 = B.eval(x), b1 = B1.eval(x), b2 = B2.eval(x), b3 = B3.eval(x);
  cplx f0 = A.eval(x) + b0 * y;
  cplx f1 = A1.eval(x) + b1 * y + b0 * y1;
  cplx f2 = A2.eval(x) + b2 * y + 2.0 * b1 * y1 + b0 * y2;
  cplx f3 = A3.eval(x) + b3 * y + 3.0 * b2 * y1 + 3.0 * b1 * y2 + b0 * y3;
  return {f0, f1, f2, f3};
}

}  // namespace hyper
}  // namespace bethe