#ifndef BETHE_SCHWARZ_HPP
#define BETHE_SCHWARZ_HPP

// Schwarzian-derivative machinery: potential from a developing map, local
// Laurent analysis of potentials, construction of the solution pair.

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "core/numkit.hpp"

namespace bethe {

// A covering-map sampler exposing value and first three derivatives at a
// point of its chart.  Rational maps provide exact jets; anything else falls
// back to 5-point central differences with Richardson extrapolation.
class MapSampler {
public:
  virtual ~MapSampler() = default;
  virtual std::array<cplx, 4> jet(cplx x) const = 0;
  cplx eval(cplx x) const { return jet(x)[0]; }

  struct CriticalPointDecl {
    cplx location;
    int order_r;  // dF vanishes to order 2r
  };
  std::vector<CriticalPointDecl> critical_points;
};

class RationalMap : public MapSampler {
public:
  explicit RationalMap(Rational f);
  std::array<cplx, 4> jet(cplx x) const override;
  const Rational& rational() const { return f_; }

private:
  Rational f_, f1_, f2_, f3_;
};

class NumericMap : public MapSampler {
public:
  // Default step balances truncation against roundoff in the third
  // derivative (noise ~ eps/h^3).
  NumericMap(std::function<cplx(cplx)> f, double fd_step = 5e-3)
      : f_(std::move(f)), h_(fd_step) {}
  std::array<cplx, 4> jet(cplx x) const override { return fd_jet3(f_, x, h_); }

private:
  std::function<cplx(cplx)> f_;
  double h_;
};

// {F, x} = (F''/F')' - (F''/F')^2 / 2 = F'''/F' - (3/2)(F''/F')^2.
cplx schwarzian(const MapSampler& F, cplx x);
cplx schwarzian(const std::array<cplx, 4>& jet);

// A potential u(xi) in a declared chart with registered second-order poles.
struct Potential {
  std::function<cplx(cplx)> u;
  struct SingularPoint {
    cplx location;
    int order_r = 0;               // quadratic residue r(r+1) expected
    cplx quadratic_residue = 0.0;  // filled on registration
  };
  std::vector<SingularPoint> singular;
  std::string chart = "x";
};

// u = -1/2 {F, .} with singular points registered at the declared critical
// points of F.
Potential potential_from_map(const std::shared_ptr<const MapSampler>& F);

// Fits u(xi) ~ A/xi^2 + H/xi + O(1) from trigonometric moments on two circles
// of radius rho and rho/2 around y.  Throws FitUnstable when the two-radius
// estimates of A disagree.
std::pair<cplx, cplx> laurent_extract(const std::function<cplx(cplx)>& u, cplx y,
                                      double rho = 1e-2, double tol = 1e-5);

// Square root continued along a polyline path; steps adapt so that arg
// increments of the radicand stay below pi/4.
class TrackedSqrt {
public:
  // base_value must satisfy base_value^2 = g(base).
  TrackedSqrt(std::function<cplx(cplx)> g, cplx base, cplx base_value);

  // Continue from the base point along the polyline path (starting at the
  // base point) and return the branch value at the final vertex.
  cplx continue_along(const std::vector<cplx>& path) const;

private:
  std::function<cplx(cplx)> g_;
  cplx base_;
  cplx base_value_;
};

// The pair (phi~, phi) = (F/sqrt(F'), 1/sqrt(F')) with a common tracked
// branch of sqrt(F') fixed at base_point.
struct SolutionPair {
  std::shared_ptr<const MapSampler> F;
  cplx base_point;
  cplx sqrt_fp_base;  // fixed branch of sqrt(F') at the base point

  // path: polyline from base_point to the evaluation point (last vertex).
  cplx phi(const std::vector<cplx>& path) const;
  cplx phi_tilde(const std::vector<cplx>& path) const;
  // Wronskian phi~' phi - phi~ phi' (should be constant, = 1 here).
  cplx wronskian(const std::vector<cplx>& path) const;
};

SolutionPair solution_pair(const std::shared_ptr<const MapSampler>& F,
                           cplx base_point);

}  // namespace bethe

#endif
