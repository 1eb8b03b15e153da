#ifndef BETHE_GENUS0_HPP
#define BETHE_GENUS0_HPP

// Genus-0 theory on the sphere: Stieltjes-Bethe residuals, generating
// functions (discriminant-form tau_YY and the cubed Bergman tau-function),
// accessory parameters in both normalizations, solution search and fitting
// of coverings with prescribed critical values.

#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "core/numkit.hpp"
#include "core/schwarz.hpp"

namespace bethe {
namespace genus0 {

struct Point {
  cplx z = 0.0;
  bool at_infinity = false;

  static Point finite(cplx v) { return {v, false}; }
  static Point infinity() { return {0.0, true}; }
};

// Zeros x_1..x_n (simple), poles y_1..y_m with positive orders r_j and the
// degree constraint n - sum r_j = 1.  At most one point may sit at infinity;
// an infinite zero is kept in the last slot.
struct Config {
  std::vector<Point> zeros;
  std::vector<Point> poles;
  std::vector<int> orders;

  Config(std::vector<Point> zeros_, std::vector<Point> poles_,
         std::vector<int> orders_);

  int n() const { return static_cast<int>(zeros.size()); }
  int m() const { return static_cast<int>(poles.size()); }
  bool all_finite() const;

  // scalar part of phi (infinite points contribute no factor)
  cplx phi(cplx x) const;
  cplx phi_derivative(cplx x) const;  // of the scalar part
};

// Left-hand sides of the Stieltjes-Bethe equations at x_1..x_{n-1}; terms
// involving the point at infinity are omitted.
std::vector<cplx> sb_residual(const Config& c);

// res|_{x_j} dx/phi^2 by contour quadrature; proportional to sb_residual
// componentwise (factor 2/phi'(x_j)^2).
std::vector<cplx> residue_check(const Config& c, double tol = 1e-12);

// Discriminant form prod_{i<j} (p_i - p_j)^{d_i d_j}.  A point at infinity is
// first moved away by a fixed Mobius gauge (value then depends on that gauge).
cplx tau_yy(const Config& c);

// Accessory parameters H_j = -2 r_j ( sum_k 1/(y_j-x_k) + sum_{i != j} r_i/(y_i-y_j) ).
std::vector<cplx> accessory(const Config& c);

// log of prod (p_i-p_j)^{2 d_i d_j (d_i+d_j+1)/((2d_i+1)(2d_j+1))} with the
// principal log of each difference; the recorded branch is this log-sum.
cplx tau_b_cubed_log(const Config& c);
cplx tau_b_cubed(const Config& c);

// Alternative accessory parameters H~_j = res|_{y_j} u/F' dx for a rational
// covering with declared critical points.
std::vector<cplx> accessory_alt(const RationalMap& F, double tol = 1e-11);

// Solve the SB system for the free zeros given poles and fixed zeros.  All
// zeros are finite; poles may include one point at infinity.  Requires
// #free = n - 1 where n = sum r + 1.
struct SolveOptions {
  double tol = 1e-12;
  int seeds = 64;
  unsigned long seed = 20240817ul;
};
std::vector<Config> solve_sb(const std::vector<Point>& poles,
                             const std::vector<int>& orders,
                             const std::vector<cplx>& fixed_zeros,
                             const SolveOptions& opt = {});

// Fit a rational covering of degree n with critical points of orders 2 r_j
// and prescribed critical values.  The Mobius gauge on the domain is fixed by
// y_1 = 0, y_2 = 1 and one pinned zero.
struct FitOptions {
  cplx pinned_zero = cplx(2.0, 0.5);
  double tol = 1e-11;
  int seeds = 96;
  unsigned long seed = 777ul;
};
struct FitResult {
  Rational F;
  std::vector<cplx> critical_points;  // y_1..y_m
  std::vector<cplx> poles;            // x_1..x_n (poles of F = zeros of phi)
  cplx scale, offset;                 // F = offset - scale * sum a_i/(x-x_i)
  double residual = 0.0;
};
FitResult fit_covering(const std::vector<int>& orders, int degree,
                       const std::vector<cplx>& critical_values,
                       const FitOptions& opt = {});

// Random admissible configurations (no SB condition) for identity tests.
Config random_config(int max_n, std::mt19937_64& rng);

}  // namespace genus0
}  // namespace bethe

#endif
