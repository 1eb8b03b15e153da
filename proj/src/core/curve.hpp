#ifndef BETHE_CURVE_HPP
#define BETHE_CURVE_HPP

// Hyperelliptic curve backend for genus 1 and 2: sheet-tracked point model,
// holomorphic differentials, period matrix over an explicitly constructed
// homology basis, Abel map, vector of Riemann constants, prime form, the
// C(x) multidifferential and Jacobi inversion.

#include <memory>
#include <random>
#include <vector>

#include "core/numkit.hpp"
#include "core/theta.hpp"

namespace bethe {
namespace hyper {

// Point (x, y) with y^2 = P(x).  The sheet label fixes y against the
// pointwise principal square root; at a branch point y = 0 and sheet = +1.
// On even-degree models the two points over x = infinity are ordinary; they
// carry infinite = true and sheet picks the branch with y ~ sheet *
// sqrt(lc) * x^{g+1}.
struct SurfacePoint {
  cplx x = 0.0;
  int sheet = +1;
  cplx y = 0.0;
  bool infinite = false;

  static SurfacePoint make(const Poly& P, cplx x, int sheet);
  static SurfacePoint infinity(int sheet);
};

// Polyline in the x-plane with the starting y value; the lift is defined by
// continuous tracking of y along the edges.  Closed paths return to their
// first vertex.
struct TrackedPath {
  std::vector<cplx> xs;
  cplx y_start = 0.0;
  bool closed = false;
};

// y continued from (a, y_a) to b along the straight segment, stepping so the
// argument of P never jumps more than pi/4 per step.
cplx continue_y(const Poly& P, cplx a, cplx y_a, cplx b);

// Local coordinate chart on the curve: xi -> (x, y).  Infinity charts use
// s = 1/x on even-degree models with inf_sign selecting the branch.
struct Chart {
  enum class Kind { Affine, Branch, Infinity };
  Kind kind = Kind::Affine;
  cplx center_x = 0.0;  // x0 or branch point e; unused at infinity
  cplx center_y = 0.0;  // y0 (Affine); 0 otherwise
  int inf_sign = +1;
  const Poly* P = nullptr;

  SurfacePoint point(cplx xi) const;  // tracked along the chart radial
  cplx dx_dxi(cplx xi) const;         // 1, 2 xi, or -1/s^2
};

class Curve {
public:
  // P of degree 3..6 with simple roots; tol drives all internal quadrature.
  explicit Curve(Poly P, double tol = 1e-10);

  int genus() const { return g_; }
  const Poly& P() const { return P_; }
  const std::vector<cplx>& branch_points() const { return branch_; }
  double branch_clearance() const { return clearance_; }

  const cmat& a_periods_raw() const { return A_raw_; }
  const cmat& b_periods_raw() const { return B_raw_; }
  const PeriodMatrix& omega() const { return *omega_; }
  // v_j = sum_k coef_[k][j] x^{k-1} dx / y
  const cmat& normalization() const { return coef_; }

  const TrackedPath& a_cycle(int i) const { return a_cycles_[i]; }
  const TrackedPath& b_cycle(int i) const { return b_cycles_[i]; }

  SurfacePoint base() const { return base_; }

  // Normalized holomorphic differentials as dx-coefficients at (x, y).
  cvec v_dx(cplx x, cplx y) const;
  // In a chart: v_j(xi) dxi-coefficients (finite at branch centers).
  cvec v_chart(const Chart& ch, cplx xi) const;

  // Abel map from the base point along a deterministic branch-avoiding path
  // (homotopy class fixed per construction; all downstream work uses anchored
  // values plus continuous local increments).
  cvec abel(const SurfacePoint& p) const;
  // Abel increment from the chart center to chart coordinate xi.
  cvec abel_increment(const Chart& ch, cplx xi) const;
  // Integral of v along an explicit tracked path (homotopy under caller
  // control); y_end optionally returned.
  cvec abel_along(const TrackedPath& path, cplx* y_end = nullptr) const;

  // Vector of Riemann constants with initial point at the curve base, and
  // its translate to x: K^x = K_base + (g-1) (A(x) - 0).
  const cvec& K_base() const { return K_base_; }
  cvec K_of_abel(const cvec& abel_x) const;

  // Abel image of the involuted base point (A(sigma p) = shift - A(p)).
  const cvec& involution_shift() const;

  // Chart centered at a surface point (Branch kind when x is a branch point).
  Chart chart_at(const SurfacePoint& p) const;

  // Integrate integrand(x, y) * dx along a tracked path.
  std::vector<cplx> integrate_tracked(
      const TrackedPath& path, int dim,
      const std::function<std::vector<cplx>(cplx, cplx)>& f, double tol,
      cplx* y_end = nullptr) const;

  // ---- prime form and C(x) ----------------------------------------------

  // Odd nonsingular characteristics, lexicographic.
  const std::vector<ThetaCharacteristic>& odd_characteristics() const {
    return odd_chars_;
  }
  const cvec& grad_theta_odd(int which) const { return grad_odd_[which]; }

  // h_delta^2 expressed in a chart at xi: sum_j d_jTheta[delta](0) v_j|chart.
  cplx sqspinor_chart(int delta, const Chart& ch, cplx xi) const;

  // Prime form E(p, q) with respect to the charts at p and q, tracked from
  // deterministic reference branches.  delta < 0 picks the first
  // characteristic that is safe for both arguments.
  cplx prime_form(const SurfacePoint& p, const SurfacePoint& q,
                  int delta = -1) const;

  // C(x) in the chart at x (genus 2; genus 1 returns the constant ratio).
  cplx c_differential(const Chart& ch, cplx xi, const cvec& abel_center) const;

  // Jacobi inversion: g surface points with Abel image w (mod lattice).
  std::vector<SurfacePoint> jacobi_inversion(const cvec& w,
                                             unsigned long seed = 99ul) const;

  // Reduce t mod the lattice Z^g + Omega Z^g to half-open [0,1)-type box;
  // returns the residual after subtracting Omega m + k with integer m, k.
  cvec lattice_reduce(const cvec& t, std::vector<long>* m_out = nullptr,
                      std::vector<long>* k_out = nullptr) const;

  double tol() const { return tol_; }

  // deterministic branch-avoiding polyline from a to b
  std::vector<cplx> avoiding_path(cplx from, cplx to) const;

private:
  void build_cycles();
  void compute_periods();
  void fix_orientations();
  void select_K_base();
  void select_odd_characteristics();

  Poly P_;
  double tol_;
  int g_ = 0;
  std::vector<cplx> branch_;   // finite branch points, argument-sorted
  bool infinity_branch_ = false;
  double clearance_ = 0.1;
  SurfacePoint base_;

  std::vector<TrackedPath> a_cycles_, b_cycles_;
  cmat A_raw_, B_raw_, coef_;
  std::unique_ptr<PeriodMatrix> omega_;

  cvec K_base_;
  std::vector<ThetaCharacteristic> odd_chars_;
  std::vector<cvec> grad_odd_;
  mutable cvec inv_shift_;  // Abel image of the involuted base point
};

// Meromorphic function A(x) + B(x) y on the curve with exact x-jets on a
// fixed sheet (y' = P'/2y and so on).
struct CurveMap {
  Rational A, B;
  Poly P;

  cplx eval(cplx x, cplx y) const { return A.eval(x) + B.eval(x) * y; }
  std::array<cplx, 4> jet(cplx x, cplx y) const;
};

}  // namespace hyper
}  // namespace bethe

#endif
