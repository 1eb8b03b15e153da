#include "core/theta.hpp"

#include <cmath>

namespace bethe {

PeriodMatrix::PeriodMatrix(cmat m) : omega(std::move(m)) {
  int g = static_cast<int>(omega.size());
  if (g == 0) fail(ErrCode::BadPeriodMatrix, "empty period matrix");
  for (const auto& row : omega)
    if (static_cast<int>(row.size()) != g)
      fail(ErrCode::BadPeriodMatrix, "period matrix not square");
  double scale = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) scale = std::max(scale, std::abs(omega[i][j]));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      if (std::abs(omega[i][j] - omega[j][i]) > 1e-10 * std::max(1.0, scale))
        fail(ErrCode::BadPeriodMatrix, "period matrix not symmetric");
  im_.assign(g, std::vector<double>(g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) im_[i][j] = omega[i][j].imag();
  auto ev = sym_eigenvalues(im_);
  min_eig_ = ev.front();
  if (min_eig_ <= 0.0)
    fail(ErrCode::BadPeriodMatrix, "Im(Omega) not positive definite");
}

int ThetaCharacteristic::parity() const {
  double s = 0.0;
  for (size_t i = 0; i < b1.size(); ++i) s += b1[i] * b2[i];
  long long v = std::llround(4.0 * s);
  return static_cast<int>(((v % 2) + 2) % 2);
}

std::vector<ThetaCharacteristic> all_half_characteristics(int g) {
  std::vector<ThetaCharacteristic> out;
  int total = 1 << (2 * g);
  for (int code = 0; code < total; ++code) {
    ThetaCharacteristic ch;
    ch.b1.resize(g);
    ch.b2.resize(g);
    for (int i = 0; i < g; ++i) {
      ch.b1[i] = ((code >> i) & 1) ? 0.5 : 0.0;
      ch.b2[i] = ((code >> (g + i)) & 1) ? 0.5 : 0.0;
    }
    out.push_back(std::move(ch));
  }
  return out;
}

namespace {

struct Reduced {
  cvec z0;              // reduced argument
  std::vector<long> m;  // integer shift along Omega columns
  std::vector<long> k;  // integer shift along unit vectors
};

Reduced reduce_argument(const cvec& z, const PeriodMatrix& om) {
  int g = om.genus();
  const auto& Y = om.im();
  std::vector<std::vector<cplx>> Yc(g, std::vector<cplx>(g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) Yc[i][j] = Y[i][j];
  std::vector<cplx> rhs(g);
  for (int i = 0; i < g; ++i) rhs[i] = z[i].imag();
  auto sol = solve_dense(Yc, rhs);
  Reduced r;
  r.m.resize(g);
  r.k.resize(g);
  r.z0.resize(g);
  for (int i = 0; i < g; ++i) r.m[i] = std::lround(sol[i].real());
  for (int i = 0; i < g; ++i) {
    cplx zi = z[i];
    for (int j = 0; j < g; ++j) zi -= om.omega[i][j] * double(r.m[j]);
    r.k[i] = std::lround(zi.real());
    r.z0[i] = zi - double(r.k[i]);
  }
  return r;
}

// Radius for the ellipsoidal index set {n : <n+c, Im Om (n+c)> <= R^2} from
// the Gaussian tail bound, with margin for derivative weights and shell
// counts.
double tail_radius(const PeriodMatrix& om, double tol, int der_order) {
  double lam = om.min_im_eigenvalue();
  int g = om.genus();
  double logtol = std::log(std::max(tol, 1e-300));
  double R = 2.0;
  for (int it = 0; it < 40; ++it) {
    double margin = std::log(std::pow(2.0 * R + 3.0, g)) +
                    der_order * std::log(2.0 * kPi * (R + 1.0) + 4.0) +
                    std::log(1e3);
    double target = (-logtol + margin) / (kPi * lam);
    double Rn = 1.0 + std::sqrt(std::max(target, 0.0));
    if (std::abs(Rn - R) < 1e-9) break;
    R = Rn;
  }
  return R;
}

void enumerate_lattice(const PeriodMatrix& om, const std::vector<double>& c,
                       double R, std::vector<std::vector<long>>& out) {
  int g = om.genus();
  const auto& Y = om.im();
  double lam = om.min_im_eigenvalue();
  long box = static_cast<long>(std::ceil(R / std::sqrt(lam))) + 1;
  std::vector<long> lo(g), hi(g);
  for (int i = 0; i < g; ++i) {
    long ci = std::lround(std::ceil(std::abs(c[i])));
    lo[i] = -box - ci;
    hi[i] = box + ci;
  }
  std::vector<long> idx(g, 0);
  // plain box scan; g <= 3 in practice
  std::function<void(int)> rec = [&](int d) {
    if (d == g) {
      double q = 0.0;
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
          q += (idx[i] + c[i]) * Y[i][j] * (idx[j] + c[j]);
      if (q <= R * R) out.push_back(idx);
      return;
    }
    for (long v = lo[d]; v <= hi[d]; ++v) {
      idx[d] = v;
      rec(d + 1);
    }
  };
  rec(0);
}

struct PreparedSum {
  Reduced red;
  std::vector<std::vector<long>> lattice;
  cplx prefactor;
  std::vector<double> mvec;
};

// Theta(z) = Theta(z0 + Om m + k) = exp(-pi i <m,Om m> - 2 pi i <m,z0>) Theta(z0),
// so the prefactor multiplying the reduced sum is exactly that exponential.
PreparedSum prepare(const cvec& z, const PeriodMatrix& om, double tol, int der) {
  int g = om.genus();
  if (static_cast<int>(z.size()) != g)
    fail(ErrCode::BadInput, "theta argument dimension mismatch");
  PreparedSum ps;
  ps.red = reduce_argument(z, om);
  const auto& Y = om.im();
  std::vector<std::vector<cplx>> Yc(g, std::vector<cplx>(g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) Yc[i][j] = Y[i][j];
  std::vector<cplx> rhs(g);
  for (int i = 0; i < g; ++i) rhs[i] = ps.red.z0[i].imag();
  auto cc = solve_dense(Yc, rhs);
  std::vector<double> c(g);
  for (int i = 0; i < g; ++i) c[i] = cc[i].real();
  double R = tail_radius(om, tol, der);
  enumerate_lattice(om, c, R, ps.lattice);
  cplx phase = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j)
      phase += -kPi * cplx(0, 1) * double(ps.red.m[i]) * om.omega[i][j] *
               double(ps.red.m[j]);
    phase += -2.0 * kPi * cplx(0, 1) * double(ps.red.m[i]) * ps.red.z0[i];
  }
  ps.prefactor = std::exp(phase);
  ps.mvec.resize(g);
  for (int i = 0; i < g; ++i) ps.mvec[i] = double(ps.red.m[i]);
  return ps;
}

}  // namespace

cplx theta(const cvec& z, const PeriodMatrix& om, double tol) {
  PreparedSum ps = prepare(z, om, tol, 0);
  int g = om.genus();
  cplx sum = 0.0;
  for (const auto& n : ps.lattice) {
    cplx e = 0.0;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j)
        e += kPi * cplx(0, 1) * double(n[i]) * om.omega[i][j] * double(n[j]);
      e += 2.0 * kPi * cplx(0, 1) * double(n[i]) * ps.red.z0[i];
    }
    sum += std::exp(e);
  }
  return ps.prefactor * sum;
}

cplx theta_deriv(const std::vector<int>& alpha, const cvec& z,
                 const PeriodMatrix& om, double tol) {
  int g = om.genus();
  if (static_cast<int>(alpha.size()) != g)
    fail(ErrCode::BadInput, "multi-index dimension mismatch");
  int order = 0;
  for (int a : alpha) {
    if (a < 0) fail(ErrCode::BadInput, "negative multi-index entry");
    order += a;
  }
  if (order > 4)
    fail(ErrCode::UnsupportedOrder, "theta derivatives support |alpha| <= 4");
  if (order == 0) return theta(z, om, tol);

  // d/dz_j of exp(-pi i<m,Om m> - 2 pi i<m,z0>) exp(pi i<n,Om n> + 2 pi i<n,z0>)
  // carries the weight 2 pi i (n_j - m_j) since dz0/dz = 1.
  PreparedSum ps = prepare(z, om, tol, order);
  cplx sum = 0.0;
  for (const auto& n : ps.lattice) {
    cplx e = 0.0;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j)
        e += kPi * cplx(0, 1) * double(n[i]) * om.omega[i][j] * double(n[j]);
      e += 2.0 * kPi * cplx(0, 1) * double(n[i]) * ps.red.z0[i];
    }
    cplx w = 1.0;
    for (int j = 0; j < g; ++j) {
      cplx base = 2.0 * kPi * cplx(0, 1) * (double(n[j]) - ps.mvec[j]);
      for (int rep = 0; rep < alpha[j]; ++rep) w *= base;
    }
    sum += w * std::exp(e);
  }
  return ps.prefactor * sum;
}

cplx theta_char(const ThetaCharacteristic& ch, const cvec& z,
                const PeriodMatrix& om, double tol) {
  int g = om.genus();
  if (static_cast<int>(ch.b1.size()) != g || static_cast<int>(ch.b2.size()) != g)
    fail(ErrCode::BadInput, "characteristic dimension mismatch");
  cvec zs(g);
  cplx phase = 0.0;
  for (int i = 0; i < g; ++i) {
    zs[i] = z[i] + ch.b2[i];
    for (int j = 0; j < g; ++j) {
      zs[i] += om.omega[i][j] * ch.b1[j];
      phase += kPi * cplx(0, 1) * ch.b1[i] * om.omega[i][j] * ch.b1[j];
    }
    phase += 2.0 * kPi * cplx(0, 1) * ch.b1[i] * (z[i] + ch.b2[i]);
  }
  return std::exp(phase) * theta(zs, om, tol);
}

cplx theta_char_deriv(const ThetaCharacteristic& ch, int j, const cvec& z,
                      const PeriodMatrix& om, double tol) {
  int g = om.genus();
  cvec zs(g);
  cplx phase = 0.0;
  for (int i = 0; i < g; ++i) {
    zs[i] = z[i] + ch.b2[i];
    for (int k = 0; k < g; ++k) {
      zs[i] += om.omega[i][k] * ch.b1[k];
      phase += kPi * cplx(0, 1) * ch.b1[i] * om.omega[i][k] * ch.b1[k];
    }
    phase += 2.0 * kPi * cplx(0, 1) * ch.b1[i] * (z[i] + ch.b2[i]);
  }
  std::vector<int> alpha(g, 0);
  alpha[j] = 1;
  cplx pref = std::exp(phase);
  return pref * (2.0 * kPi * cplx(0, 1) * ch.b1[j] * theta(zs, om, tol) +
                 theta_deriv(alpha, zs, om, tol));
}

}  // namespace bethe
