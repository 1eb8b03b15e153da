#include "core/numkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace bethe {

// ---------------------------------------------------------------------------
// Poly

Poly Poly::monomial(int deg, cplx lead) {
  std::vector<cplx> c(deg + 1, 0.0);
  c[deg] = lead;
  return Poly(std::move(c));
}

Poly Poly::from_roots(const std::vector<cplx>& roots, cplx lead) {
  Poly p({lead});
  for (cplx r : roots) p = p * Poly({-r, 1.0});
  return p;
}

void Poly::trim(double rel_eps) {
  double m = 0.0;
  for (const cplx& v : c_) m = std::max(m, std::abs(v));
  while (!c_.empty() && std::abs(c_.back()) <= rel_eps * m) c_.pop_back();
  if (m == 0.0) c_.clear();
}

cplx Poly::eval(cplx x) const {
  cplx r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return Poly();
  std::vector<cplx> d(c_.size() - 1);
  for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
  return Poly(std::move(d));
}

double Poly::max_abs_coeff() const {
  double m = 0.0;
  for (const cplx& v : c_) m = std::max(m, std::abs(v));
  return m;
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<cplx> c(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) c[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) c[i] += o.c_[i];
  return Poly(std::move(c));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * cplx(-1.0); }

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  std::vector<cplx> c(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
  return Poly(std::move(c));
}

Poly Poly::operator*(cplx s) const {
  std::vector<cplx> c = c_;
  for (cplx& v : c) v *= s;
  return Poly(std::move(c));
}

void Poly::divmod(const Poly& n, const Poly& d, Poly& q, Poly& r) {
  if (d.is_zero()) fail(ErrCode::BadInput, "polynomial division by zero");
  std::vector<cplx> rem = n.c_;
  int dn = n.degree(), dd = d.degree();
  if (dn < dd) {
    q = Poly();
    r = n;
    return;
  }
  std::vector<cplx> quo(dn - dd + 1, 0.0);
  for (int k = dn - dd; k >= 0; --k) {
    cplx f = rem[k + dd] / d.c_[dd];
    quo[k] = f;
    for (int j = 0; j <= dd; ++j) rem[k + j] -= f * d.c_[j];
  }
  q = Poly(std::move(quo));
  r = Poly(std::move(rem));
}

Poly Poly::gcd(Poly a, Poly b, double tol) {
  // Euclid, rescaling both operands to unit max coefficient every round so
  // the negligibility cutoff is scale invariant.
  auto normalize = [](Poly& p) {
    double m = p.max_abs_coeff();
    if (m > 0.0) p = p * (1.0 / m);
  };
  normalize(a);
  normalize(b);
  while (!b.is_zero()) {
    if (b.max_abs_coeff() <= tol) break;
    if (b.degree() == 0) return Poly({1.0});
    Poly q, r;
    divmod(a, b, q, r);
    r.trim(tol);
    a = b;
    b = r;
    normalize(b);
  }
  if (a.is_zero()) return Poly({1.0});
  // make monic
  return a * (1.0 / a.c_.back());
}

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) fail(ErrCode::BadInput, "rational with zero denominator");
  reduce();
}

void Rational::reduce() {
  Poly g = Poly::gcd(num_, den_);
  if (g.degree() > 0) {
    // only cancel when g genuinely divides both (numerical gcd can lie)
    Poly qn, rn, qd, rd;
    Poly::divmod(num_, g, qn, rn);
    Poly::divmod(den_, g, qd, rd);
    double sn = std::max(num_.max_abs_coeff(), 1e-300);
    double sd = std::max(den_.max_abs_coeff(), 1e-300);
    if (rn.max_abs_coeff() < 1e-8 * sn && rd.max_abs_coeff() < 1e-8 * sd) {
      num_ = qn;
      den_ = qd;
    }
  }
  // normalize leading denominator coefficient to 1
  if (!den_.is_zero()) {
    cplx lead = den_.coeffs().back();
    num_ = num_ * (1.0 / lead);
    den_ = den_ * (1.0 / lead);
  }
}

cplx Rational::eval(cplx x) const { return num_.eval(x) / den_.eval(x); }

Rational Rational::derivative() const {
  return Rational(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}
Rational Rational::operator-(const Rational& o) const {
  return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}
Rational Rational::operator*(const Rational& o) const {
  return Rational(num_ * o.num_, den_ * o.den_);
}
Rational Rational::operator/(const Rational& o) const {
  if (o.num_.is_zero()) fail(ErrCode::BadInput, "rational division by zero");
  return Rational(num_ * o.den_, den_ * o.num_);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// ---------------------------------------------------------------------------
// Contours

ContourSpec ContourSpec::circle(cplx center, double radius, int orientation) {
  if (radius <= 0.0) fail(ErrCode::BadInput, "circle radius must be positive");
  ContourSpec c;
  c.kind = Kind::Circle;
  c.center = center;
  c.radius = radius;
  c.orientation = orientation;
  return c;
}

ContourSpec ContourSpec::polyline(std::vector<cplx> vertices, bool closed,
                                  int orientation) {
  if (vertices.size() < 2) fail(ErrCode::BadInput, "polyline needs >= 2 vertices");
  ContourSpec c;
  c.kind = Kind::Polyline;
  c.vertices = std::move(vertices);
  c.closed = closed;
  c.orientation = orientation;
  return c;
}

static double point_segment_dist(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double l2 = std::norm(ab);
  if (l2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a) * std::conj(ab)).real() / l2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

double ContourSpec::clearance(cplx p) const {
  if (kind == Kind::Circle) return std::abs(std::abs(p - center) - radius);
  double d = 1e300;
  for (size_t i = 0; i + 1 < vertices.size(); ++i)
    d = std::min(d, point_segment_dist(p, vertices[i], vertices[i + 1]));
  if (closed && vertices.size() >= 2)
    d = std::min(d, point_segment_dist(p, vertices.back(), vertices.front()));
  return d;
}

void ContourSpec::require_clearance(const std::vector<cplx>& points,
                                    double min_clear) const {
  for (cplx p : points)
    if (clearance(p) < min_clear)
      fail(ErrCode::ClearanceViolated, "contour passes too close to a singular point");
}

namespace {

constexpr double kOverflowGuard = 1e12;
constexpr int kMaxDepth = 24;
constexpr int kGlOrder = 16;

struct Segment {
  // parametrized piece z(t), t in [0,1]
  std::function<cplx(double)> z;
  std::function<cplx(double)> dz;
};

template <typename Acc>
void integrate_panel(const std::function<void(cplx, cplx, Acc&)>& accum,
                     const Segment& seg, double a, double b, Acc& out) {
  const auto& [xs, ws] = gauss_legendre(kGlOrder);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < kGlOrder; ++i) {
    double t = mid + half * xs[i];
    accum(seg.z(t), seg.dz(t) * (half * ws[i]), out);
  }
}

std::vector<Segment> build_segments(const ContourSpec& c) {
  std::vector<Segment> segs;
  if (c.kind == ContourSpec::Kind::Circle) {
    // split the circle in four arcs so the adaptive layer starts sanely
    for (int q = 0; q < 4; ++q) {
      double th0 = 2.0 * kPi * q / 4.0, dth = 2.0 * kPi / 4.0;
      cplx ctr = c.center;
      double R = c.radius;
      int ori = c.orientation;
      segs.push_back(Segment{
          [=](double t) {
            double th = ori > 0 ? th0 + dth * t : -(th0 + dth * t);
            return ctr + R * std::exp(cplx(0, th));
          },
          [=](double t) {
            double th = ori > 0 ? th0 + dth * t : -(th0 + dth * t);
            return cplx(0, ori > 0 ? dth : -dth) * R * std::exp(cplx(0, th));
          }});
    }
  } else {
    std::vector<cplx> v = c.vertices;
    if (c.closed) v.push_back(v.front());
    if (c.orientation < 0) std::reverse(v.begin(), v.end());
    for (size_t i = 0; i + 1 < v.size(); ++i) {
      cplx a = v[i], b = v[i + 1];
      if (std::abs(b - a) == 0.0) continue;
      segs.push_back(Segment{[=](double t) { return a + t * (b - a); },
                             [=](double) { return b - a; }});
    }
  }
  return segs;
}

}  // namespace

std::vector<cplx> contour_integrate_vec(
    const std::function<std::vector<cplx>(cplx)>& f, int dim,
    const ContourSpec& c, double tol) {
  if (tol <= 0.0) fail(ErrCode::BadInput, "tol must be positive");
  auto segs = build_segments(c);
  std::vector<cplx> total(dim, 0.0);

  auto accum = std::function<void(cplx, cplx, std::vector<cplx>&)>(
      [&](cplx z, cplx wdz, std::vector<cplx>& out) {
        std::vector<cplx> v = f(z);
        for (int k = 0; k < dim; ++k) {
          if (std::abs(v[k]) > kOverflowGuard)
            fail(ErrCode::SingularOnContour, "sample exceeded overflow guard");
          out[k] += v[k] * wdz;
        }
      });

  double seg_tol = tol / std::max<size_t>(1, segs.size());

  struct Item {
    size_t seg;
    double a, b;
    std::vector<cplx> whole;
    int depth;
  };

  for (size_t s = 0; s < segs.size(); ++s) {
    std::vector<cplx> whole(dim, 0.0);
    integrate_panel<std::vector<cplx>>(accum, segs[s], 0.0, 1.0, whole);
    std::vector<Item> stack{{s, 0.0, 1.0, whole, 0}};
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      double m = 0.5 * (it.a + it.b);
      std::vector<cplx> left(dim, 0.0), right(dim, 0.0);
      integrate_panel<std::vector<cplx>>(accum, segs[it.seg], it.a, m, left);
      integrate_panel<std::vector<cplx>>(accum, segs[it.seg], m, it.b, right);
      double err = 0.0, mag = 0.0;
      for (int k = 0; k < dim; ++k) {
        err = std::max(err, std::abs(it.whole[k] - left[k] - right[k]));
        mag = std::max(mag, std::abs(left[k] + right[k]));
      }
      double local_tol = seg_tol * (it.b - it.a) * std::max(1.0, mag);
      if (err <= local_tol || it.depth >= kMaxDepth) {
        if (err > local_tol)
          fail(ErrCode::NonConvergence, "quadrature refinement exceeded depth cap");
        for (int k = 0; k < dim; ++k) total[k] += left[k] + right[k];
      } else {
        stack.push_back({it.seg, it.a, m, left, it.depth + 1});
        stack.push_back({it.seg, m, it.b, right, it.depth + 1});
      }
    }
  }
  return total;
}

cplx contour_integrate(const std::function<cplx(cplx)>& f, const ContourSpec& c,
                       double tol) {
  auto fv = [&](cplx z) { return std::vector<cplx>{f(z)}; };
  return contour_integrate_vec(fv, 1, c, tol)[0];
}

// ---------------------------------------------------------------------------
// Dense linear algebra

std::vector<cplx> solve_dense(std::vector<std::vector<cplx>> A, std::vector<cplx> b) {
  int n = static_cast<int>(A.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300)
      fail(ErrCode::NonConvergence, "singular linear system");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      cplx f = A[r][col] / A[col][col];
      for (int k = col; k < n; ++k) A[r][k] -= f * A[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<cplx> x(n);
  for (int r = n - 1; r >= 0; --r) {
    cplx s = b[r];
    for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

std::vector<std::vector<cplx>> invert_dense(std::vector<std::vector<cplx>> A) {
  int n = static_cast<int>(A.size());
  std::vector<std::vector<cplx>> inv(n, std::vector<cplx>(n, 0.0));
  for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300)
      fail(ErrCode::NonConvergence, "singular matrix");
    std::swap(A[piv], A[col]);
    std::swap(inv[piv], inv[col]);
    cplx d = A[col][col];
    for (int k = 0; k < n; ++k) {
      A[col][k] /= d;
      inv[col][k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      cplx f = A[r][col];
      if (f == cplx(0.0)) continue;
      for (int k = 0; k < n; ++k) {
        A[r][k] -= f * A[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

cplx det_dense(std::vector<std::vector<cplx>> A) {
  int n = static_cast<int>(A.size());
  cplx det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) return 0.0;
    if (piv != col) {
      std::swap(A[piv], A[col]);
      det = -det;
    }
    det *= A[col][col];
    for (int r = col + 1; r < n; ++r) {
      cplx f = A[r][col] / A[col][col];
      for (int k = col; k < n; ++k) A[r][k] -= f * A[col][k];
    }
  }
  return det;
}

std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> S) {
  int n = static_cast<int>(S.size());
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += S[p][q] * S[p][q];
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(S[p][q]) < 1e-300) continue;
        double theta = 0.5 * (S[q][q] - S[p][p]) / S[p][q];
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double skp = S[k][p], skq = S[k][q];
          S[k][p] = c * skp - s * skq;
          S[k][q] = s * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          double spk = S[p][k], sqk = S[q][k];
          S[p][k] = c * spk - s * sqk;
          S[q][k] = s * spk + c * sqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = S[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<cplx> poly_roots(const Poly& p, double tol) {
  int n = p.degree();
  if (n < 1) return {};
  // normalize to monic
  std::vector<cplx> a(n + 1);
  for (int k = 0; k <= n; ++k) a[k] = p.coeff(k) / p.coeff(n);
  double radius = 1.0;
  for (int k = 0; k < n; ++k)
    radius = std::max(radius, 2.0 * std::pow(std::abs(a[k]), 1.0 / (n - k)));
  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k)
    z[k] = 0.4 * radius * std::exp(cplx(0, 2.0 * kPi * k / n + 0.35));
  auto eval = [&](cplx x) {
    cplx v = a[n];
    for (int k = n - 1; k >= 0; --k) v = v * x + a[k];
    return v;
  };
  for (int iter = 0; iter < 500; ++iter) {
    double moved = 0.0;
    for (int k = 0; k < n; ++k) {
      cplx num = eval(z[k]);
      cplx den = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != k) den *= (z[k] - z[j]);
      cplx dz = num / den;
      z[k] -= dz;
      moved = std::max(moved, std::abs(dz));
    }
    if (moved < tol * std::max(1.0, radius)) break;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Newton

static double inf_norm(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

bool newton_polish(const VecFn& F, std::vector<cplx>& z, const NewtonOptions& opt) {
  int n = static_cast<int>(z.size());
  std::vector<cplx> fz;
  try {
    fz = F(z);
  } catch (const Error&) {
    return false;
  }
  if (static_cast<int>(fz.size()) != n)
    fail(ErrCode::BadInput, "system dimension != vector dimension");
  double fn = inf_norm(fz);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (fn < opt.tol) return true;
    // finite-difference Jacobian, column by column
    std::vector<std::vector<cplx>> J(n, std::vector<cplx>(n));
    try {
      for (int j = 0; j < n; ++j) {
        double h = opt.fd_step * std::max(1.0, std::abs(z[j]));
        std::vector<cplx> zp = z;
        zp[j] += h;
        std::vector<cplx> fp = F(zp);
        for (int i = 0; i < n; ++i) J[i][j] = (fp[i] - fz[i]) / h;
      }
      std::vector<cplx> rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -fz[i];
      std::vector<cplx> dz = solve_dense(J, rhs);
      double lambda = 1.0;
      bool ok = false;
      for (int bt = 0; bt <= opt.backtrack_max; ++bt) {
        std::vector<cplx> zn = z;
        for (int i = 0; i < n; ++i) zn[i] += lambda * dz[i];
        std::vector<cplx> fn2v;
        try {
          fn2v = F(zn);
        } catch (const Error&) {
          lambda *= 0.5;
          continue;
        }
        double fn2 = inf_norm(fn2v);
        if (fn2 < fn || fn2 < opt.tol) {
          z = zn;
          fz = fn2v;
          fn = fn2;
          ok = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!ok) return fn < opt.tol;
    } catch (const Error&) {
      return false;
    }
  }
  return fn < opt.tol;
}

std::vector<std::vector<cplx>> newton_multistart(
    const VecFn& F, const std::vector<std::vector<cplx>>& seeds,
    const NewtonOptions& opt) {
  if (seeds.empty()) fail(ErrCode::BadInput, "seeds must be nonempty");
  std::vector<std::vector<cplx>> roots;
  for (const auto& seed : seeds) {
    std::vector<cplx> z = seed;
    if (!newton_polish(F, z, opt)) continue;
    bool dup = false;
    for (const auto& r : roots) {
      double d = 0.0;
      for (size_t i = 0; i < z.size(); ++i) d = std::max(d, std::abs(z[i] - r[i]));
      if (d < 10.0 * opt.tol) {
        dup = true;
        break;
      }
    }
    if (!dup) roots.push_back(z);
  }
  if (roots.empty()) fail(ErrCode::NoRootFound, "no seed converged");
  return roots;
}

// ---------------------------------------------------------------------------
// Finite differences

FdResult fd_derivative(const std::function<cplx(cplx)>& f, cplx z0, double h) {
  if (h <= 0.0) fail(ErrCode::BadInput, "h must be positive");
  return {(f(z0 + h) - f(z0 - h)) / (2.0 * h), "central"};
}

cplx fd_derivative_richardson(const std::function<cplx(cplx)>& f, cplx z0, double h) {
  cplx d1 = (f(z0 + h) - f(z0 - h)) / (2.0 * h);
  cplx d2 = (f(z0 + h / 2.0) - f(z0 - h / 2.0)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

std::array<cplx, 4> fd_jet3(const std::function<cplx(cplx)>& f, cplx z0, double h) {
  auto stencil = [&](double hh) {
    std::array<cplx, 5> s;
    for (int k = -2; k <= 2; ++k) s[k + 2] = f(z0 + double(k) * hh);
    cplx d1 = (-s[4] + 8.0 * s[3] - 8.0 * s[1] + s[0]) / (12.0 * hh);
    cplx d2 = (-s[4] + 16.0 * s[3] - 30.0 * s[2] + 16.0 * s[1] - s[0]) /
              (12.0 * hh * hh);
    cplx d3 = (s[4] - 2.0 * s[3] + 2.0 * s[1] - s[0]) / (2.0 * hh * hh * hh);
    return std::array<cplx, 3>{d1, d2, d3};
  };
  auto c1 = stencil(h), c2 = stencil(h / 2.0);
  // Richardson: 4th-order stencils for d1,d2 (error h^4), 2nd-order for d3.
  cplx d1 = (16.0 * c2[0] - c1[0]) / 15.0;
  cplx d2 = (16.0 * c2[1] - c1[1]) / 15.0;
  cplx d3 = (4.0 * c2[2] - c1[2]) / 3.0;
  return {f(z0), d1, d2, d3};
}

}  // namespace bethe
