#include "core/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bethe {
namespace elliptic {

namespace {

struct Reduction {
  cplx x0;
  long k = 0, m = 0;
};

Reduction reduce(cplx x, cplx sigma) {
  Reduction r;
  r.m = std::lround(x.imag() / sigma.imag());
  cplx xp = x - double(r.m) * sigma;
  r.k = std::lround(xp.real());
  r.x0 = xp - double(r.k);
  return r;
}

void check_modulus(cplx sigma) {
  if (sigma.imag() <= 0.0) fail(ErrCode::BadModulus, "Im sigma must be positive");
  if (std::exp(-kPi * sigma.imag()) >= 0.999)
    fail(ErrCode::BadModulus, "|q| too close to 1");
}

// raw series at a reduced argument; der-th x-derivative
cplx series(int der, cplx x0, cplx sigma, double tol) {
  const cplx I(0, 1);
  cplx q_exp = kPi * I * sigma;  // q = exp(i pi sigma)
  double y = sigma.imag();
  int N = 8;
  while (N < 4000) {
    double decay = std::exp(-kPi * y * ((N - 0.5) * (N - 0.5) - (N + 0.5)));
    double weight = std::pow(kPi * (2.0 * N + 1.0), der) * (2.0 * N + 1.0);
    if (decay * weight < tol) break;
    ++N;
  }
  cplx sum = 0.0;
  for (int n = -N; n < N; ++n) {
    double h = n + 0.5;
    cplx term = std::exp(q_exp * h * h + (2.0 * n + 1.0) * kPi * I * x0);
    if (n & 1) term = -term;
    cplx w = 1.0;
    for (int d = 0; d < der; ++d) w *= (2.0 * n + 1.0) * kPi * I;
    sum += w * term;
  }
  return -I * sum;
}

}  // namespace

cplx theta1_d(int der, cplx x, cplx sigma, double tol) {
  check_modulus(sigma);
  if (der < 0 || der > 3)
    fail(ErrCode::UnsupportedOrder, "theta1 derivatives up to order 3");
  Reduction r = reduce(x, sigma);
  const cplx I(0, 1);
  // theta1(x0 + k + m sigma) = (-1)^{k+m} exp(-i pi sigma m^2 - 2 pi i m x0) theta1(x0)
  cplx a = -2.0 * kPi * I * double(r.m);
  cplx pref = std::exp(-kPi * I * sigma * double(r.m) * double(r.m) + a * r.x0);
  if ((r.k + r.m) & 1) pref = -pref;
  static const double binom[4][4] = {
      {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  cplx out = 0.0;
  for (int l = 0; l <= der; ++l) {
    cplx apow = 1.0;
    for (int t = 0; t < der - l; ++t) apow *= a;
    out += binom[der][l] * apow * series(l, r.x0, sigma, tol);
  }
  return pref * out;
}

cplx theta1(cplx x, cplx sigma, double tol) { return theta1_d(0, x, sigma, tol); }

cplx theta1_dsigma(cplx x, cplx sigma, double tol) {
  check_modulus(sigma);
  // term-wise sigma derivative without reduction (test helper; keep |Im x| small)
  const cplx I(0, 1);
  cplx sum = 0.0;
  for (int n = -64; n < 64; ++n) {
    double h = n + 0.5;
    cplx term = std::exp(kPi * I * sigma * h * h + (2.0 * n + 1.0) * kPi * I * x);
    if (n & 1) term = -term;
    sum += kPi * I * h * h * term;
  }
  (void)tol;
  return -I * sum;
}

cplx log_deriv(cplx x, cplx sigma, double tol) {
  return theta1_d(1, x, sigma, tol) / theta1_d(0, x, sigma, tol);
}

cplx log_deriv_prime(cplx x, cplx sigma, double tol) {
  cplx t0 = theta1_d(0, x, sigma, tol);
  cplx t1 = theta1_d(1, x, sigma, tol);
  cplx t2 = theta1_d(2, x, sigma, tol);
  return t2 / t0 - (t1 / t0) * (t1 / t0);
}

double lattice_distance(cplx d, cplx sigma) {
  Reduction r = reduce(d, sigma);
  double best = 1e300;
  for (int dm = -1; dm <= 1; ++dm)
    for (int dk = -1; dk <= 1; ++dk)
      best = std::min(best, std::abs(r.x0 + double(dk) + double(dm) * sigma));
  return best;
}

Config::Config(cplx sigma_, std::vector<cplx> zeros_, std::vector<cplx> poles_,
               std::vector<int> orders_, int beta1_, int beta2_)
    : sigma(sigma_), zeros(std::move(zeros_)), poles(std::move(poles_)),
      orders(std::move(orders_)), beta1(beta1_), beta2(beta2_) {
  check_modulus(sigma);
  if (poles.size() != orders.size()) fail(ErrCode::BadInput, "orders vs poles");
  int rsum = 0;
  for (int r : orders) {
    if (r < 1) fail(ErrCode::BadInput, "orders must be >= 1");
    rsum += r;
  }
  if (rsum != n())
    fail(ErrCode::DegenerateConfig, "degree-0 divisor requires sum r = n");
  cplx bal = -std::accumulate(zeros.begin(), zeros.end(), cplx(0.0));
  for (int j = 0; j < m(); ++j) bal += double(orders[j]) * poles[j];
  bal += double(beta1) * sigma + double(beta2);
  if (std::abs(bal) > 1e-10)
    fail(ErrCode::DegenerateConfig, "balance condition violated");
  std::vector<cplx> pts = zeros;
  pts.insert(pts.end(), poles.begin(), poles.end());
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b)
      if (lattice_distance(pts[a] - pts[b], sigma) < 1e-10)
        fail(ErrCode::DegenerateConfig, "points coincide mod the lattice");
}

Config Config::balanced(cplx sigma, std::vector<cplx> zeros_head,
                        std::vector<cplx> poles, std::vector<int> orders,
                        int beta1, int beta2) {
  cplx last = double(beta1) * sigma + double(beta2);
  for (size_t j = 0; j < poles.size(); ++j) last += double(orders[j]) * poles[j];
  for (cplx z : zeros_head) last -= z;
  zeros_head.push_back(last);
  return Config(sigma, std::move(zeros_head), std::move(poles), std::move(orders),
                beta1, beta2);
}

cplx phi_eval(const Config& c, cplx x, double tol) {
  for (int j = 0; j < c.m(); ++j)
    if (lattice_distance(x - c.poles[j], c.sigma) < 1e-11)
      fail(ErrCode::AtPole, "phi evaluated at a pole");
  // exp(-2 pi i beta1 x): with the balance convention -sum x + sum r y
  // + beta1 sigma + beta2 = 0 this sign makes phi single-valued
  cplx v = std::exp(-2.0 * kPi * cplx(0, 1) * double(c.beta1) * x);
  for (cplx z : c.zeros) v *= theta1(x - z, c.sigma, tol);
  for (int j = 0; j < c.m(); ++j) {
    cplx t = theta1(x - c.poles[j], c.sigma, tol);
    for (int rep = 0; rep < c.orders[j]; ++rep) v /= t;
  }
  return v;
}

cplx phi_log_deriv(const Config& c, cplx x, double tol) {
  cplx s = -2.0 * kPi * cplx(0, 1) * double(c.beta1);
  for (cplx z : c.zeros) s += log_deriv(x - z, c.sigma, tol);
  for (int j = 0; j < c.m(); ++j)
    s -= double(c.orders[j]) * log_deriv(x - c.poles[j], c.sigma, tol);
  return s;
}

std::vector<cplx> sb_residual(const Config& c, double tol) {
  std::vector<cplx> out;
  for (int j = 0; j + 1 < c.n(); ++j) {
    cplx xj = c.zeros[j];
    cplx s = 2.0 * kPi * cplx(0, 1) * double(c.beta1);
    for (int i = 0; i < c.m(); ++i)
      s += double(c.orders[i]) * log_deriv(xj - c.poles[i], c.sigma, tol);
    for (int i = 0; i < c.n(); ++i)
      if (i != j) s -= log_deriv(xj - c.zeros[i], c.sigma, tol);
    out.push_back(s);
  }
  return out;
}

std::vector<cplx> residue_check(const Config& c, double tol) {
  std::vector<cplx> out;
  for (int j = 0; j + 1 < c.n(); ++j) {
    cplx xj = c.zeros[j];
    double dmin = 1e300;
    for (int i = 0; i < c.n(); ++i)
      if (i != j) dmin = std::min(dmin, lattice_distance(xj - c.zeros[i], c.sigma));
    for (int i = 0; i < c.m(); ++i)
      dmin = std::min(dmin, lattice_distance(xj - c.poles[i], c.sigma));
    double radius = 0.4 * std::min(dmin, 0.5);
    auto circle = ContourSpec::circle(xj, radius);
    cplx I = contour_integrate(
        [&](cplx x) {
          cplx p = phi_eval(c, x, 1e-14);
          return 1.0 / (p * p);
        },
        circle, tol);
    out.push_back(I / kTwoPiI);
  }
  return out;
}

std::pair<cplx, cplx> period_conditions(const Config& c, cplx base_hint, double tol) {
  cplx p = base_hint;
  auto clear = [&](cplx base) {
    double dmin = 1e300;
    for (int seg = 0; seg < 2; ++seg) {
      cplx dir = seg == 0 ? cplx(1.0) : c.sigma;
      for (int s = 0; s <= 32; ++s) {
        cplx pt = base + dir * (double(s) / 32.0);
        for (cplx z : c.zeros)
          dmin = std::min(dmin, lattice_distance(pt - z, c.sigma));
      }
    }
    return dmin;
  };
  bool ok = false;
  for (int attempt = 0; attempt < 16; ++attempt) {
    if (clear(p) > 0.05) {
      ok = true;
      break;
    }
    p += cplx(0.0731, 0.0389) + double(attempt) * cplx(0.013, 0.017);
  }
  if (!ok) fail(ErrCode::PathThroughPole, "no clear base point after 16 shifts");
  auto f = [&](cplx x) {
    cplx v = phi_eval(c, x, 1e-14);
    return 1.0 / (v * v);
  };
  cplx A = contour_integrate(f, ContourSpec::polyline({p, p + 1.0}), tol);
  cplx B = contour_integrate(f, ContourSpec::polyline({p, p + c.sigma}), tol);
  return {A, B};
}

cplx tau_yy(const Config& c, double tol) {
  std::vector<cplx> pts = c.zeros;
  std::vector<int> d(c.n(), 1);
  for (int j = 0; j < c.m(); ++j) {
    pts.push_back(c.poles[j]);
    d.push_back(-c.orders[j]);
  }
  cplx v = 1.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      cplx t = theta1(pts[i] - pts[j], c.sigma, tol);
      int e = d[i] * d[j];
      if (e >= 0)
        for (int k = 0; k < e; ++k) v *= t;
      else
        for (int k = 0; k < -e; ++k) v /= t;
    }
  return v;
}

std::vector<cplx> accessory(const Config& c, double tol) {
  std::vector<cplx> H(c.m());
  for (int k = 0; k < c.m(); ++k) {
    cplx s = 0.0;
    for (int l = 0; l < c.m(); ++l)
      if (l != k)
        s += double(c.orders[l]) * log_deriv(c.poles[k] - c.poles[l], c.sigma, tol);
    for (int j = 0; j < c.n(); ++j)
      s -= log_deriv(c.poles[k] - c.zeros[j], c.sigma, tol);
    H[k] = 2.0 * double(c.orders[k]) * s;
  }
  return H;
}

cplx PotentialElliptic::eval_direct(cplx x, double tol) const {
  cplx P = phi_log_deriv(config, x, tol);
  cplx Pp = 0.0;
  for (cplx z : config.zeros) Pp += log_deriv_prime(x - z, config.sigma, tol);
  for (int j = 0; j < config.m(); ++j)
    Pp -= double(config.orders[j]) *
          log_deriv_prime(x - config.poles[j], config.sigma, tol);
  return Pp + P * P;
}

cplx PotentialElliptic::eval(cplx x, double tol) const {
  cplx u = C;
  for (int k = 0; k < config.m(); ++k) {
    double r = config.orders[k];
    u += -r * (r + 1.0) *
             log_deriv_prime(x - config.poles[k], config.sigma, tol) +
         H[k] * log_deriv(x - config.poles[k], config.sigma, tol);
  }
  return u;
}

PotentialElliptic make_potential(const Config& c, double sb_tol) {
  PotentialElliptic p{c, accessory(c), 0.0, true};
  auto res = sb_residual(c);
  for (const cplx& r : res)
    if (std::abs(r) > sb_tol) p.sb_ok = false;
  cplx probe(0.1721, 0.0933);
  for (int attempt = 0; attempt < 32; ++attempt) {
    double dmin = 1e300;
    for (cplx z : c.zeros) dmin = std::min(dmin, lattice_distance(probe - z, c.sigma));
    for (cplx y : c.poles) dmin = std::min(dmin, lattice_distance(probe - y, c.sigma));
    if (dmin > 0.08) break;
    probe += cplx(0.0571, 0.0313);
  }
  p.C = 0.0;
  p.C = p.eval_direct(probe) - p.eval(probe);
  return p;
}

Config random_config(int max_n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> B(-1, 1);
  for (int attempt = 0; attempt < 400; ++attempt) {
    cplx sigma(0.6 * (U(rng) - 0.5), 0.8 + 0.7 * U(rng));
    std::uniform_int_distribution<int> Npick(2, max_n);
    int n = Npick(rng);
    int rleft = n;
    std::vector<int> orders;
    while (rleft > 0) {
      std::uniform_int_distribution<int> R(1, std::min(rleft, 2));
      int r = R(rng);
      orders.push_back(r);
      rleft -= r;
    }
    if (orders.empty()) continue;
    std::vector<cplx> poles, zeros_head;
    for (size_t j = 0; j < orders.size(); ++j)
      poles.push_back(cplx(U(rng), U(rng) * sigma.imag() * 0.9 + 0.05 * sigma.imag()));
    for (int i = 0; i + 1 < n; ++i)
      zeros_head.push_back(cplx(U(rng), U(rng) * sigma.imag() * 0.9));
    int b1 = B(rng), b2 = B(rng);
    try {
      Config c = Config::balanced(sigma, zeros_head, poles, orders, b1, b2);
      std::vector<cplx> pts = c.zeros;
      pts.insert(pts.end(), c.poles.begin(), c.poles.end());
      double sep = 1e300;
      for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b)
          sep = std::min(sep, lattice_distance(pts[a] - pts[b], sigma));
      if (sep < 0.08) continue;
      return c;
    } catch (const Error&) {
      continue;
    }
  }
  fail(ErrCode::DegenerateConfig, "random elliptic config generation failed");
}

std::vector<Config> solve_sb(cplx sigma, const std::vector<cplx>& poles,
                             const std::vector<int>& orders, int beta1, int beta2,
                             double tol, int seeds, unsigned long seed) {
  int rsum = 0;
  for (int r : orders) rsum += r;
  int n = rsum;
  if (n < 2) fail(ErrCode::BadInput, "need n >= 2 for a nontrivial system");

  VecFn F = [&](const std::vector<cplx>& zh) {
    std::vector<cplx> head(zh.begin(), zh.end());
    Config c = Config::balanced(sigma, head, poles, orders, beta1, beta2);
    return sb_residual(c);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<cplx>> seedv;
  for (int s = 0; s < seeds; ++s) {
    std::vector<cplx> u(n - 1);
    for (int k = 0; k + 1 < n; ++k) u[k] = cplx(U(rng), U(rng) * sigma.imag());
    seedv.push_back(std::move(u));
  }
  NewtonOptions nopt;
  nopt.tol = tol;
  auto roots = newton_multistart(F, seedv, nopt);
  std::vector<Config> out;
  for (const auto& u : roots) {
    try {
      std::vector<cplx> head(u.begin(), u.end());
      Config c = Config::balanced(sigma, head, poles, orders, beta1, beta2);
      std::vector<cplx> pts = c.zeros;
      pts.insert(pts.end(), c.poles.begin(), c.poles.end());
      double sep = 1e300;
      for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b)
          sep = std::min(sep, lattice_distance(pts[a] - pts[b], sigma));
      if (sep < 1e-5) continue;
      out.push_back(std::move(c));
    } catch (const Error&) {
      continue;
    }
  }
  if (out.empty()) fail(ErrCode::NoRootFound, "no elliptic SB solution found");
  return out;
}

}  // namespace elliptic
}  // namespace bethe
