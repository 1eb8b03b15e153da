#include "core/genus0.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bethe {
namespace genus0 {

namespace {

constexpr double kCoincide = 1e-12;

// fixed gauge used to move a point at infinity to the finite plane
const cplx kGaugeShift(0.5772156649015329, 0.3183098861837907);

struct FlatPoint {
  cplx z;
  bool inf;
  int d;  // divisor weight: +1 zeros, -r poles
};

std::vector<FlatPoint> divisor(const Config& c) {
  std::vector<FlatPoint> pts;
  for (const auto& x : c.zeros) pts.push_back({x.z, x.at_infinity, +1});
  for (size_t j = 0; j < c.poles.size(); ++j)
    pts.push_back({c.poles[j].z, c.poles[j].at_infinity, -c.orders[j]});
  return pts;
}

}  // namespace

Config::Config(std::vector<Point> zeros_, std::vector<Point> poles_,
               std::vector<int> orders_)
    : zeros(std::move(zeros_)), poles(std::move(poles_)), orders(std::move(orders_)) {
  if (poles.size() != orders.size())
    fail(ErrCode::BadInput, "orders must match poles");
  int rsum = 0;
  for (int r : orders) {
    if (r < 1) fail(ErrCode::BadInput, "pole orders must be >= 1");
    rsum += r;
  }
  if (static_cast<int>(zeros.size()) - rsum != 1)
    fail(ErrCode::DegenerateConfig, "degree constraint n - sum r = 1 violated");
  // keep an infinite zero in the last slot
  int inf_count = 0;
  for (size_t i = 0; i < zeros.size(); ++i)
    if (zeros[i].at_infinity) {
      ++inf_count;
      std::swap(zeros[i], zeros.back());
    }
  for (const auto& p : poles)
    if (p.at_infinity) ++inf_count;
  if (inf_count > 1)
    fail(ErrCode::DegenerateConfig, "at most one point at infinity");
  // pairwise distinct
  auto pts = divisor(*this);
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b) {
      if (pts[a].inf || pts[b].inf) continue;
      if (std::abs(pts[a].z - pts[b].z) < kCoincide)
        fail(ErrCode::DegenerateConfig, "coincident divisor points");
    }
}

bool Config::all_finite() const {
  for (const auto& x : zeros)
    if (x.at_infinity) return false;
  for (const auto& y : poles)
    if (y.at_infinity) return false;
  return true;
}

cplx Config::phi(cplx x) const {
  cplx v = 1.0;
  for (const auto& z : zeros)
    if (!z.at_infinity) v *= (x - z.z);
  for (size_t j = 0; j < poles.size(); ++j)
    if (!poles[j].at_infinity) v /= std::pow(x - poles[j].z, orders[j]);
  return v;
}

cplx Config::phi_derivative(cplx x) const {
  cplx lg = 0.0;
  for (const auto& z : zeros)
    if (!z.at_infinity) lg += 1.0 / (x - z.z);
  for (size_t j = 0; j < poles.size(); ++j)
    if (!poles[j].at_infinity) lg -= double(orders[j]) / (x - poles[j].z);
  return phi(x) * lg;
}

std::vector<cplx> sb_residual(const Config& c) {
  std::vector<cplx> out;
  for (int j = 0; j + 1 < c.n(); ++j) {
    if (c.zeros[j].at_infinity)
      fail(ErrCode::DegenerateConfig, "residual site at infinity");
    cplx xj = c.zeros[j].z;
    cplx s = 0.0;
    for (size_t i = 0; i < c.poles.size(); ++i)
      if (!c.poles[i].at_infinity) s += double(c.orders[i]) / (xj - c.poles[i].z);
    for (int i = 0; i < c.n(); ++i) {
      if (i == j || c.zeros[i].at_infinity) continue;
      s -= 1.0 / (xj - c.zeros[i].z);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<cplx> residue_check(const Config& c, double tol) {
  std::vector<cplx> out;
  auto pts = divisor(c);
  for (int j = 0; j + 1 < c.n(); ++j) {
    cplx xj = c.zeros[j].z;
    double dmin = 1e300;
    for (const auto& p : pts) {
      if (p.inf) continue;
      double d = std::abs(p.z - xj);
      if (d > kCoincide) dmin = std::min(dmin, d);
    }
    double radius = 0.5 * std::min(dmin, 2.0);
    auto circle = ContourSpec::circle(xj, radius);
    cplx I = contour_integrate(
        [&](cplx x) {
          cplx p = c.phi(x);
          return 1.0 / (p * p);
        },
        circle, tol);
    out.push_back(I / kTwoPiI);
  }
  return out;
}

namespace {

// Divisor in an all-finite chart; an infinite point is moved by the fixed
// gauge x -> 1/(x - shift).
std::vector<FlatPoint> finite_divisor(const Config& c) {
  auto pts = divisor(c);
  bool has_inf = false;
  for (const auto& p : pts) has_inf |= p.inf;
  if (!has_inf) return pts;
  cplx shift = kGaugeShift;
  for (int attempt = 0; attempt < 16; ++attempt) {
    bool ok = true;
    for (const auto& p : pts)
      if (!p.inf && std::abs(p.z - shift) < 1e-6) ok = false;
    if (ok) break;
    shift += cplx(0.1037, 0.0731);
  }
  std::vector<FlatPoint> out;
  for (auto p : pts) {
    if (p.inf)
      out.push_back({0.0, false, p.d});
    else
      out.push_back({1.0 / (p.z - shift), false, p.d});
  }
  for (size_t a = 0; a < out.size(); ++a)
    for (size_t b = a + 1; b < out.size(); ++b)
      if (std::abs(out[a].z - out[b].z) < kCoincide)
        fail(ErrCode::DegenerateConfig, "gauge collision while removing infinity");
  return out;
}

}  // namespace

cplx tau_yy(const Config& c) {
  auto pts = finite_divisor(c);
  cplx v = 1.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      int e = pts[i].d * pts[j].d;
      cplx base = pts[i].z - pts[j].z;
      if (e >= 0)
        for (int k = 0; k < e; ++k) v *= base;
      else
        for (int k = 0; k < -e; ++k) v /= base;
    }
  return v;
}

std::vector<cplx> accessory(const Config& c) {
  std::vector<cplx> H(c.m(), 0.0);
  for (int j = 0; j < c.m(); ++j) {
    if (c.poles[j].at_infinity) {
      H[j] = 0.0;  // drop-the-term convention
      continue;
    }
    cplx yj = c.poles[j].z;
    cplx s = 0.0;
    for (const auto& x : c.zeros)
      if (!x.at_infinity) s += 1.0 / (yj - x.z);
    for (int i = 0; i < c.m(); ++i) {
      if (i == j || c.poles[i].at_infinity) continue;
      s += double(c.orders[i]) / (c.poles[i].z - yj);
    }
    H[j] = -2.0 * double(c.orders[j]) * s;
  }
  return H;
}

cplx tau_b_cubed_log(const Config& c) {
  auto pts = finite_divisor(c);
  cplx lg = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      double di = pts[i].d, dj = pts[j].d;
      double e = 2.0 * di * dj * (di + dj + 1.0) /
                 ((2.0 * di + 1.0) * (2.0 * dj + 1.0));
      lg += e * std::log(pts[i].z - pts[j].z);  // principal branch
    }
  return lg;
}

cplx tau_b_cubed(const Config& c) { return std::exp(tau_b_cubed_log(c)); }

std::vector<cplx> accessory_alt(const RationalMap& F, double tol) {
  std::vector<cplx> out;
  if (F.critical_points.empty()) return out;
  std::vector<cplx> avoid;
  for (const auto& cp : F.critical_points) avoid.push_back(cp.location);
  for (cplx r : poly_roots(F.rational().den())) avoid.push_back(r);
  for (cplx r : poly_roots(F.rational().derivative().num())) avoid.push_back(r);
  auto pot = [&](cplx x) {
    auto jet = F.jet(x);
    return -0.5 * schwarzian(jet) / jet[1];
  };
  for (const auto& cp : F.critical_points) {
    double dmin = 2.0;
    for (cplx a : avoid) {
      double d = std::abs(a - cp.location);
      if (d > kCoincide) dmin = std::min(dmin, d);
    }
    auto circle = ContourSpec::circle(cp.location, 0.5 * dmin);
    cplx I = contour_integrate(pot, circle, tol);
    out.push_back(I / kTwoPiI);
  }
  return out;
}

std::vector<Config> solve_sb(const std::vector<Point>& poles,
                             const std::vector<int>& orders,
                             const std::vector<cplx>& fixed_zeros,
                             const SolveOptions& opt) {
  int rsum = 0;
  for (int r : orders) rsum += r;
  int n = rsum + 1;
  int free_count = n - static_cast<int>(fixed_zeros.size());
  if (free_count == 0) {
    std::vector<Point> zs;
    for (cplx z : fixed_zeros) zs.push_back(Point::finite(z));
    return {Config(zs, poles, orders)};
  }
  if (free_count != n - 1)
    fail(ErrCode::BadInput, "solve_sb expects exactly one fixed zero");

  auto build = [&](const std::vector<cplx>& free_zeros) {
    std::vector<Point> zs;
    for (cplx z : fixed_zeros) zs.push_back(Point::finite(z));
    for (cplx z : free_zeros) zs.push_back(Point::finite(z));
    return Config(zs, poles, orders);
  };

  VecFn F = [&](const std::vector<cplx>& z) {
    Config c = build(z);
    return sb_residual(c);
  };

  double scale = 1.0;
  for (const auto& y : poles)
    if (!y.at_infinity) scale = std::max(scale, std::abs(y.z));
  for (cplx z : fixed_zeros) scale = std::max(scale, std::abs(z));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<cplx>> seeds;
  for (int s = 0; s < opt.seeds; ++s) {
    std::vector<cplx> seed(free_count);
    double rho = scale * (0.4 + 1.6 * U(rng));
    double off = 2.0 * kPi * U(rng);
    for (int k = 0; k < free_count; ++k) {
      double ang = off + 2.0 * kPi * k / free_count + 0.2 * (U(rng) - 0.5);
      seed[k] = rho * std::exp(cplx(0, ang)) +
                0.05 * scale * cplx(U(rng) - 0.5, U(rng) - 0.5);
    }
    seeds.push_back(std::move(seed));
  }

  NewtonOptions nopt;
  nopt.tol = opt.tol;
  std::vector<std::vector<cplx>> raw;
  try {
    raw = newton_multistart(F, seeds, nopt);
  } catch (const Error&) {
    fail(ErrCode::NoRootFound, "no admissible SB solution found");
  }

  // canonicalize zero order before deduplicating across permutations
  std::vector<Config> out;
  std::vector<std::vector<cplx>> kept;
  for (auto root : raw) {
    std::sort(root.begin(), root.end(), [](cplx a, cplx b) {
      if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    bool dup = false;
    for (const auto& k : kept) {
      double d = 0.0;
      for (size_t i = 0; i < root.size(); ++i)
        d = std::max(d, std::abs(root[i] - k[i]));
      if (d < 100.0 * opt.tol) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    try {
      Config c = build(root);
      // genuine solutions: points well separated and all n residuals small
      // (Newton only enforced the first n-1 at its own ordering; near-
      // degenerate limits sneak through otherwise)
      double sep = 1e300;
      std::vector<cplx> fin;
      for (const auto& z : c.zeros)
        if (!z.at_infinity) fin.push_back(z.z);
      for (const auto& y : c.poles)
        if (!y.at_infinity) fin.push_back(y.z);
      for (size_t a = 0; a < fin.size(); ++a)
        for (size_t b = a + 1; b < fin.size(); ++b)
          sep = std::min(sep, std::abs(fin[a] - fin[b]));
      if (sep < 1e-6 * scale) continue;
      bool all_small = true;
      for (int j = 0; j < c.n(); ++j) {
        cplx xj = c.zeros[j].z;
        cplx s = 0.0;
        for (size_t i = 0; i < c.poles.size(); ++i)
          if (!c.poles[i].at_infinity)
            s += double(c.orders[i]) / (xj - c.poles[i].z);
        for (int i = 0; i < c.n(); ++i)
          if (i != j && !c.zeros[i].at_infinity) s -= 1.0 / (xj - c.zeros[i].z);
        if (std::abs(s) > 1e3 * opt.tol) all_small = false;
      }
      if (!all_small) continue;
      out.push_back(std::move(c));
      kept.push_back(root);
    } catch (const Error&) {
      // degenerate limit configurations are not solutions
    }
  }
  if (out.empty()) fail(ErrCode::NoRootFound, "no admissible SB solution found");
  return out;
}

FitResult fit_covering(const std::vector<int>& orders, int degree,
                       const std::vector<cplx>& critical_values,
                       const FitOptions& opt) {
  int m = static_cast<int>(orders.size());
  if (m < 2) fail(ErrCode::InconsistentProfile, "need at least two critical points");
  if (static_cast<int>(critical_values.size()) != m)
    fail(ErrCode::BadInput, "one critical value per critical point");
  int rsum = 0;
  for (int r : orders) rsum += r;
  if (2 * rsum != 2 * degree - 2)
    fail(ErrCode::InconsistentProfile, "Riemann-Hurwitz: sum 2 r_j = 2n - 2");
  if (degree > 5) fail(ErrCode::InconsistentProfile, "degree n <= 5 supported");
  int n = degree;

  // With psi = prod (x-y_j)^{2r_j} / prod (x-x_i)^2 and vanishing residues
  // b_i, F = B - A sum_i a_i/(x-x_i) is the rational antiderivative of A psi.
  struct Strengths {
    std::vector<cplx> a, b;
  };
  auto strengths = [&](const std::vector<cplx>& xs, const std::vector<cplx>& ys) {
    for (size_t a = 0; a < xs.size(); ++a)
      for (size_t b = a + 1; b < xs.size(); ++b)
        if (std::abs(xs[a] - xs[b]) < 1e-9)
          fail(ErrCode::DegenerateConfig, "zeros collided");
    for (size_t a = 0; a < ys.size(); ++a)
      for (size_t b = a + 1; b < ys.size(); ++b)
        if (std::abs(ys[a] - ys[b]) < 1e-9)
          fail(ErrCode::DegenerateConfig, "critical points collided");
    for (size_t a = 0; a < ys.size(); ++a)
      for (size_t b = 0; b < xs.size(); ++b)
        if (std::abs(ys[a] - xs[b]) < 1e-9)
          fail(ErrCode::DegenerateConfig, "critical point hit a zero");
    Strengths s;
    s.a.resize(n);
    s.b.resize(n);
    for (int i = 0; i < n; ++i) {
      cplx g = 1.0;
      for (int j = 0; j < m; ++j)
        for (int rep = 0; rep < 2 * orders[j]; ++rep) g *= (xs[i] - ys[j]);
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        cplx d = xs[i] - xs[k];
        g /= d * d;
      }
      s.a[i] = g;
      cplx lg = 0.0;
      for (int j = 0; j < m; ++j) lg += 2.0 * double(orders[j]) / (xs[i] - ys[j]);
      for (int k = 0; k < n; ++k)
        if (k != i) lg -= 2.0 / (xs[i] - xs[k]);
      s.b[i] = g * lg;
    }
    return s;
  };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  // inner: residue equations at x_1..x_{n-1} in the well-scaled SB form
  // (b_i / a_i); warm starting keeps the outer iteration on one Hurwitz sheet
  std::vector<cplx> warm;
  auto inner_solve = [&](const std::vector<cplx>& ys) {
    VecFn sys = [&](const std::vector<cplx>& u) {
      std::vector<cplx> xs(n, opt.pinned_zero);
      for (int i = 1; i < n; ++i) xs[i] = u[i - 1];
      for (size_t a = 0; a < xs.size(); ++a)
        for (size_t b = a + 1; b < xs.size(); ++b)
          if (std::abs(xs[a] - xs[b]) < 1e-9)
            fail(ErrCode::DegenerateConfig, "zeros collided");
      std::vector<cplx> res;
      for (int i = 0; i + 1 < n; ++i) {
        cplx lg = 0.0;
        for (int j = 0; j < m; ++j) lg += double(orders[j]) / (xs[i] - ys[j]);
        for (int k = 0; k < n; ++k)
          if (k != i) lg -= 1.0 / (xs[i] - xs[k]);
        res.push_back(lg);
      }
      return res;
    };
    NewtonOptions nopt;
    nopt.tol = opt.tol;
    nopt.max_iter = 80;
    if (!warm.empty()) {
      std::vector<cplx> u = warm;
      if (newton_polish(sys, u, nopt)) {
        warm = u;
        std::vector<cplx> xs(n, opt.pinned_zero);
        for (int i = 1; i < n; ++i) xs[i] = u[i - 1];
        return xs;
      }
    }
    std::vector<std::vector<cplx>> seeds;
    double scale = 1.0;
    for (cplx y : ys) scale = std::max(scale, std::abs(y));
    scale = std::max(scale, std::abs(opt.pinned_zero));
    for (int s = 0; s < opt.seeds; ++s) {
      std::vector<cplx> seed(n - 1);
      double rho = scale * (0.5 + 1.8 * (0.5 + 0.5 * U(rng)));
      double off = kPi * U(rng);
      for (int k = 0; k < n - 1; ++k)
        seed[k] = rho * std::exp(cplx(0, off + 2.0 * kPi * k / (n - 1))) +
                  0.1 * scale * cplx(U(rng), U(rng));
      seeds.push_back(std::move(seed));
    }
    auto roots = newton_multistart(sys, seeds, nopt);
    // reject roots that collapsed or escaped toward infinity; among the
    // survivors prefer the most compact configuration
    const std::vector<cplx>* best = nullptr;
    double best_span = 1e300;
    for (const auto& u : roots) {
      std::vector<cplx> xs(n, opt.pinned_zero);
      for (int i = 1; i < n; ++i) xs[i] = u[i - 1];
      double sep = 1e300, span = 0.0;
      for (int a = 0; a < n; ++a) span = std::max(span, std::abs(xs[a]));
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) sep = std::min(sep, std::abs(xs[a] - xs[b]));
      for (int a = 0; a < n; ++a)
        for (int j = 0; j < m; ++j) sep = std::min(sep, std::abs(xs[a] - ys[j]));
      if (sep < 1e-4 * scale || span > 30.0 * scale) continue;
      if (span < best_span) {
        best_span = span;
        best = &u;
      }
    }
    if (!best)
      fail(ErrCode::NoRootFound, "inner residue system had only degenerate roots");
    warm = *best;
    std::vector<cplx> xs(n, opt.pinned_zero);
    for (int i = 1; i < n; ++i) xs[i] = (*best)[i - 1];
    return xs;
  };

  // A, B from the two normalized critical values (linear)
  auto scale_offset = [&](const std::vector<cplx>& xs, const std::vector<cplx>& ys,
                          const Strengths& s, cplx& A, cplx& B) {
    auto S = [&](cplx x) {
      cplx v = 0.0;
      for (int i = 0; i < n; ++i) v -= s.a[i] / (x - xs[i]);
      return v;
    };
    cplx s1 = S(ys[0]), s2 = S(ys[1]);
    if (std::abs(s1 - s2) < 1e-14)
      fail(ErrCode::DegenerateConfig, "critical values collapsed");
    A = (critical_values[0] - critical_values[1]) / (s1 - s2);
    B = critical_values[0] - A * s1;
  };

  auto assemble = [&](const std::vector<cplx>& ys) {
    std::vector<cplx> xs = inner_solve(ys);
    auto s = strengths(xs, ys);
    cplx A, B;
    scale_offset(xs, ys, s, A, B);
    return std::make_tuple(xs, s, A, B);
  };

  // outer: remaining critical values pin y_3..y_m
  std::vector<cplx> ys(m, 0.0);
  ys[1] = 1.0;
  if (m > 2) {
    VecFn outer = [&](const std::vector<cplx>& u) {
      std::vector<cplx> yy = ys;
      for (int j = 2; j < m; ++j) yy[j] = u[j - 2];
      auto [xs, s, A, B] = assemble(yy);
      std::vector<cplx> res;
      for (int j = 2; j < m; ++j) {
        cplx S = 0.0;
        for (int i = 0; i < n; ++i) S -= s.a[i] / (yy[j] - xs[i]);
        res.push_back(B + A * S - critical_values[j]);
      }
      return res;
    };
    NewtonOptions nopt;
    nopt.tol = opt.tol;
    nopt.max_iter = 60;
    nopt.fd_step = 1e-6;
    bool done = false;
    for (int attempt = 0; attempt < opt.seeds && !done; ++attempt) {
      warm.clear();
      std::vector<cplx> u(m - 2);
      for (int j = 2; j < m; ++j)
        u[j - 2] = critical_values[j] * (0.4 + 0.4 * U(rng)) +
                   cplx(0.8 * U(rng), 0.8 * U(rng)) + cplx(0.0, 0.3);
      try {
        if (newton_polish(outer, u, nopt)) {
          for (int j = 2; j < m; ++j) ys[j] = u[j - 2];
          done = true;
        }
      } catch (const Error&) {
        continue;
      }
    }
    if (!done) fail(ErrCode::NoRootFound, "outer critical-value fit failed");
  } else {
    warm.clear();
  }

  auto [xs, s, A, B] = assemble(ys);
  double rnorm = 0.0;
  for (int i = 0; i + 1 < n; ++i) rnorm = std::max(rnorm, std::abs(s.b[i]));
  for (int j = 0; j < m; ++j) {
    cplx S = 0.0;
    for (int i = 0; i < n; ++i) S -= s.a[i] / (ys[j] - xs[i]);
    rnorm = std::max(rnorm, std::abs(B + A * S - critical_values[j]));
  }

  Poly Q = Poly::from_roots(xs);
  Poly N;  // sum_i a_i prod_{k != i} (x - x_k)
  for (int i = 0; i < n; ++i) {
    std::vector<cplx> others;
    for (int k = 0; k < n; ++k)
      if (k != i) others.push_back(xs[k]);
    N = N + Poly::from_roots(others) * s.a[i];
  }
  FitResult out{Rational(Q * B - N * A, Q), ys, xs, A, B, rnorm};
  return out;
}

Config random_config(int max_n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> Npick(2, max_n);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int attempt = 0; attempt < 200; ++attempt) {
    int n = Npick(rng);
    int rleft = n - 1;
    std::vector<int> orders;
    while (rleft > 0) {
      std::uniform_int_distribution<int> R(1, std::min(rleft, 2));
      int r = R(rng);
      orders.push_back(r);
      rleft -= r;
    }
    std::vector<Point> zeros, poles;
    std::vector<cplx> all;
    auto fresh = [&]() -> cplx {
      for (int t = 0; t < 100; ++t) {
        cplx p(2.2 * U(rng), 2.2 * U(rng));
        bool ok = true;
        for (cplx q : all)
          if (std::abs(p - q) < 0.25) ok = false;
        if (ok) {
          all.push_back(p);
          return p;
        }
      }
      fail(ErrCode::DegenerateConfig, "could not place distinct points");
    };
    try {
      for (int i = 0; i < n; ++i) zeros.push_back(Point::finite(fresh()));
      for (size_t j = 0; j < orders.size(); ++j)
        poles.push_back(Point::finite(fresh()));
      return Config(zeros, poles, orders);
    } catch (const Error&) {
      continue;
    }
  }
  fail(ErrCode::DegenerateConfig, "random config generation failed");
}

}  // namespace genus0
}  // namespace bethe
