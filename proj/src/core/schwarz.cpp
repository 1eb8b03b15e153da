#include "core/schwarz.hpp"

#include <cmath>

namespace bethe {

RationalMap::RationalMap(Rational f) : f_(std::move(f)) {
  f1_ = f_.derivative();
  f2_ = f1_.derivative();
  f3_ = f2_.derivative();
}

std::array<cplx, 4> RationalMap::jet(cplx x) const {
  return {f_.eval(x), f1_.eval(x), f2_.eval(x), f3_.eval(x)};
}

cplx schwarzian(const std::array<cplx, 4>& jet) {
  cplx fp = jet[1], fpp = jet[2], fppp = jet[3];
  double scale = std::abs(fpp) + std::abs(fppp) + 1.0;
  if (std::abs(fp) < 1e-12 * scale)
    fail(ErrCode::CriticalPoint, "F' vanishes at the evaluation point");
  cplx q = fpp / fp;
  return fppp / fp - 1.5 * q * q;
}

cplx schwarzian(const MapSampler& F, cplx x) { return schwarzian(F.jet(x)); }

Potential potential_from_map(const std::shared_ptr<const MapSampler>& F) {
  Potential p;
  p.u = [F](cplx x) { return -0.5 * schwarzian(*F, x); };
  for (const auto& cp : F->critical_points) {
    Potential::SingularPoint s;
    s.location = cp.location;
    s.order_r = cp.order_r;
    s.quadratic_residue = double(cp.order_r) * double(cp.order_r + 1);
    p.singular.push_back(s);
  }
  return p;
}

std::pair<cplx, cplx> laurent_extract(const std::function<cplx(cplx)>& u, cplx y,
                                      double rho, double tol) {
  // Trigonometric moments on |xi| = r: mean over the circle of u * xi^{k}
  // picks out the Laurent coefficient a_{-k} r^{... }; with xi = r e^{it},
  // mean(u * xi^2) -> a_{-2} and mean(u * xi) -> a_{-1} up to aliasing.
  struct M {
    cplx a2, a1, a3;
  };
  auto moments = [&](double r) {
    const int N = 128;
    M m{0.0, 0.0, 0.0};
    for (int j = 0; j < N; ++j) {
      double t = 2.0 * kPi * j / N;
      cplx xi = r * std::exp(cplx(0, t));
      cplx v = u(y + xi);
      m.a2 += v * xi * xi;
      m.a1 += v * xi;
      m.a3 += v * xi * xi * xi;
    }
    m.a2 /= double(N);
    m.a1 /= double(N);
    m.a3 /= double(N);
    return m;
  };
  M m1 = moments(rho);
  M m2 = moments(rho / 2.0);
  double scale = std::max({std::abs(m1.a2), std::abs(m2.a2), 1.0});
  if (std::abs(m1.a2 - m2.a2) > tol * scale)
    fail(ErrCode::FitUnstable, "two-radius Laurent estimates disagree");
  // a third-order pole leaks into the xi^3 moment but not into A
  if (std::abs(m2.a3) > tol * rho * scale)
    fail(ErrCode::FitUnstable, "pole of order > 2 detected at the fit point");
  return {m2.a2, m2.a1};
}

// ---------------------------------------------------------------------------

TrackedSqrt::TrackedSqrt(std::function<cplx(cplx)> g, cplx base, cplx base_value)
    : g_(std::move(g)), base_(base), base_value_(base_value) {}

cplx TrackedSqrt::continue_along(const std::vector<cplx>& path) const {
  if (!path.empty() && std::abs(path.front() - base_) > 1e-12)
    fail(ErrCode::BadInput, "path must start at the base point");
  cplx cur_g = g_(base_);
  cplx cur_s = base_value_;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    cplx a = path[i], b = path[i + 1];
    double t = 0.0, dt = 1.0;
    int guard = 0;
    while (t < 1.0) {
      if (++guard > 200000)
        fail(ErrCode::BranchTrackingFailure, "sqrt continuation stalled");
      double tn = std::min(1.0, t + dt);
      cplx xn = a + tn * (b - a);
      cplx gn = g_(xn);
      if (std::abs(gn) == 0.0)
        fail(ErrCode::BranchTrackingFailure, "path hits a zero of the radicand");
      cplx ratio = gn / cur_g;
      double da = std::abs(std::arg(ratio));
      if (da > kPi / 4.0 && dt > 1e-12) {
        dt *= 0.5;
        continue;
      }
      cur_s *= std::sqrt(ratio);  // principal root: |arg| < pi/8 after the guard
      cur_g = gn;
      t = tn;
      if (da < kPi / 16.0) dt = std::min(1.0, dt * 2.0);
    }
  }
  return cur_s;
}

// ---------------------------------------------------------------------------

SolutionPair solution_pair(const std::shared_ptr<const MapSampler>& F,
                           cplx base_point) {
  auto jet = F->jet(base_point);
  double scale = std::abs(jet[2]) + std::abs(jet[3]) + 1.0;
  if (std::abs(jet[1]) < 1e-12 * scale)
    fail(ErrCode::BranchTrackingFailure, "base point too close to a critical point");
  SolutionPair sp;
  sp.F = F;
  sp.base_point = base_point;
  sp.sqrt_fp_base = std::sqrt(jet[1]);
  return sp;
}

static cplx tracked_sqrt_fp(const SolutionPair& sp, const std::vector<cplx>& path) {
  TrackedSqrt tr([&](cplx x) { return sp.F->jet(x)[1]; }, sp.base_point,
                 sp.sqrt_fp_base);
  return tr.continue_along(path);
}

cplx SolutionPair::phi(const std::vector<cplx>& path) const {
  return 1.0 / tracked_sqrt_fp(*this, path);
}

cplx SolutionPair::phi_tilde(const std::vector<cplx>& path) const {
  cplx x = path.empty() ? base_point : path.back();
  return F->eval(x) / tracked_sqrt_fp(*this, path);
}

cplx SolutionPair::wronskian(const std::vector<cplx>& path) const {
  // W = phi~' phi - phi~ phi' = F' phi^2; recompute from tracked values so
  // branch errors surface as deviations from 1.
  cplx s = tracked_sqrt_fp(*this, path);
  cplx x = path.empty() ? base_point : path.back();
  cplx fp = F->jet(x)[1];
  return fp / (s * s);
}

}  // namespace bethe
