#ifndef BETHE_NUMKIT_HPP
#define BETHE_NUMKIT_HPP

// Shared numerical kernels: complex polynomial / rational arithmetic,
// adaptive contour quadrature, multistart Newton for complex systems and
// central finite differences.  Everything here is pure and reentrant.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace bethe {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline const cplx kTwoPiI = cplx(0.0, 2.0 * kPi);

// ---------------------------------------------------------------------------
// Polynomials, coefficients in ascending order.  The zero polynomial is {}.

class Poly {
public:
  Poly() = default;
  Poly(std::initializer_list<cplx> c) : c_(c) { trim(); }
  explicit Poly(std::vector<cplx> c) : c_(std::move(c)) { trim(); }

  static Poly monomial(int deg, cplx lead = 1.0);
  static Poly from_roots(const std::vector<cplx>& roots, cplx lead = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 if zero
  bool is_zero() const { return c_.empty(); }
  cplx coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx(0);
  }
  const std::vector<cplx>& coeffs() const { return c_; }

  cplx eval(cplx x) const;
  Poly derivative() const;
  double max_abs_coeff() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(cplx s) const;

  // Euclidean division: *this = q*d + r with deg r < deg d.
  static void divmod(const Poly& n, const Poly& d, Poly& q, Poly& r);
  static Poly gcd(Poly a, Poly b, double tol = 1e-10);

  void trim(double rel_eps = 1e-13);

private:
  std::vector<cplx> c_;
};

// Rational function num/den in reduced form; denominator never identically 0.
class Rational {
public:
  Rational() : num_({0.0}), den_({1.0}) {}
  Rational(Poly num, Poly den);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  cplx eval(cplx x) const;
  Rational derivative() const;

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;

private:
  void reduce();
  Poly num_, den_;
};

// ---------------------------------------------------------------------------
// Contours.  A contour is a circle or a polyline (closed or open); the
// orientation flips the traversal direction.

struct ContourSpec {
  enum class Kind { Circle, Polyline };
  Kind kind = Kind::Circle;
  cplx center = 0.0;
  double radius = 1.0;
  std::vector<cplx> vertices;  // polyline only
  int orientation = +1;
  bool closed = true;  // polyline: append first vertex at the end

  static ContourSpec circle(cplx center, double radius, int orientation = +1);
  static ContourSpec polyline(std::vector<cplx> vertices, bool closed = false,
                              int orientation = +1);

  // Minimal distance from the contour trace to a point.
  double clearance(cplx p) const;
  void require_clearance(const std::vector<cplx>& points, double min_clear) const;
};

// Adaptive Gauss-Legendre panels with dyadic refinement.  Panels whose
// samples exceed the overflow guard abort as SingularOnContour; exceeding
// the depth cap raises NonConvergence.
cplx contour_integrate(const std::function<cplx(cplx)>& f, const ContourSpec& c,
                       double tol);

// As above but for a vector-valued integrand evaluated once per node.
std::vector<cplx> contour_integrate_vec(
    const std::function<std::vector<cplx>(cplx)>& f, int dim,
    const ContourSpec& c, double tol);

// ---------------------------------------------------------------------------
// Multistart Newton with finite-difference Jacobian.

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 60;
  double fd_step = 1e-7;
  int backtrack_max = 10;
};

using VecFn = std::function<std::vector<cplx>(const std::vector<cplx>&)>;

// Returns deduplicated roots with ||F(root)||_inf < tol; roots closer than
// 10*tol are merged.  Throws NoRootFound if every seed fails.
std::vector<std::vector<cplx>> newton_multistart(
    const VecFn& F, const std::vector<std::vector<cplx>>& seeds,
    const NewtonOptions& opt = {});

// Single-start variant; returns false instead of throwing.
bool newton_polish(const VecFn& F, std::vector<cplx>& z, const NewtonOptions& opt);

// ---------------------------------------------------------------------------
// Finite differences.

struct FdResult {
  cplx value;
  std::string method;
};

// Central difference (f(z+h) - f(z-h)) / 2h.
FdResult fd_derivative(const std::function<cplx(cplx)>& f, cplx z0, double h);

// Richardson-extrapolated central difference (steps h and h/2).
cplx fd_derivative_richardson(const std::function<cplx(cplx)>& f, cplx z0,
                              double h);

// Jet of derivatives f, f', f'', f''' by 5-point stencils with Richardson
// extrapolation (used for non-rational covering maps).
std::array<cplx, 4> fd_jet3(const std::function<cplx(cplx)>& f, cplx z0,
                            double h);

// ---------------------------------------------------------------------------
// Small dense complex linear algebra (systems arising here have g <= 2 or
// Newton dimension <= ~8).

std::vector<cplx> solve_dense(std::vector<std::vector<cplx>> A,
                              std::vector<cplx> b);
std::vector<std::vector<cplx>> invert_dense(std::vector<std::vector<cplx>> A);
cplx det_dense(std::vector<std::vector<cplx>> A);

// Eigenvalues of a real symmetric matrix (cyclic Jacobi).
std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> S);

// All roots of a complex polynomial (Durand-Kerner, deterministic start).
std::vector<cplx> poly_roots(const Poly& p, double tol = 1e-13);

// Gauss-Legendre nodes/weights on [-1,1]; cached per n.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

}  // namespace bethe

#endif
