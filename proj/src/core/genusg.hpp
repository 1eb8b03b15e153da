#ifndef BETHE_GENUSG_HPP
#define BETHE_GENUSG_HPP

// Higher-genus theory on hyperelliptic curves: admissible divisor
// configurations, the prime-form representation of phi, higher-genus
// Stieltjes-Bethe residuals, tau_YY, accessory parameters, period
// conditions, tau_B^{3/2} and the dimension count.

#include <memory>
#include <random>
#include <vector>

#include "core/curve.hpp"

namespace bethe {
namespace genusg {

using hyper::Chart;
using hyper::Curve;
using hyper::CurveMap;
using hyper::SurfacePoint;

// One divisor point with its weight (+1 zeros, -r poles), declared chart,
// Abel image anchored at the curve base and the reference spinor branch.
struct DivisorPoint {
  SurfacePoint p;
  int d = 1;
  Chart chart;
  cvec abel;
  cplx h_ref = 1.0;   // sqrt of the odd-spinor square in the chart
};

struct Characteristics {
  std::vector<double> beta1, beta2;  // entries in {0, 1/2}
  double residual = 0.0;             // norm of the (defbeta) defect
};

// Solve the half-integer characteristic equation A(D) - K = Omega b1 + b2
// modulo the lattice; throws NotCanonical when nothing fits within tol.
Characteristics characteristic_vectors(const Curve& curve,
                                       const std::vector<SurfacePoint>& points,
                                       const std::vector<int>& weights,
                                       double tol = 1e-6);

class Config {
public:
  Config(std::shared_ptr<const Curve> curve, std::vector<SurfacePoint> zeros,
         std::vector<SurfacePoint> poles, std::vector<int> orders,
         double char_tol = 1e-6);

  // General divisor (weights of any sign, e.g. multiple zeros); used by the
  // covering-induced configurations where phi's zeros need not be simple.
  static Config from_divisor(std::shared_ptr<const Curve> curve,
                             const std::vector<SurfacePoint>& points,
                             const std::vector<int>& weights,
                             double char_tol = 1e-6);

  const Curve& curve() const { return *curve_; }
  std::shared_ptr<const Curve> curve_ptr() const { return curve_; }
  int n() const { return static_cast<int>(zeros_.size()); }
  int m() const { return static_cast<int>(poles_.size()); }
  int genus() const { return curve_->genus(); }

  const std::vector<DivisorPoint>& divisor() const { return div_; }
  const DivisorPoint& zero(int k) const { return div_[m() + k]; }
  const DivisorPoint& pole(int j) const { return div_[j]; }
  const std::vector<int>& orders() const { return orders_; }
  const Characteristics& characteristics() const { return chars_; }
  int delta() const { return delta_; }

  // spinor square in a chart for the selected odd characteristic
  cplx G_chart(const Chart& ch, cplx xi) const;

private:
  Config() = default;
  void init(const std::vector<SurfacePoint>& pts, const std::vector<int>& weights,
            double char_tol);

  std::shared_ptr<const Curve> curve_;
  std::vector<SurfacePoint> zeros_, poles_;
  std::vector<int> orders_;
  std::vector<DivisorPoint> div_;  // poles first (matching paper indexing), then zeros
  Characteristics chars_;
  int delta_ = 0;
};

// ---- phi assembled from theta data ----------------------------------------

// Transported evaluation state along a path in the x-chart.
struct TransportState {
  cplx x, y;
  cvec abel;
  cplx h;     // tracked branch of sqrt(G) in the x-chart
  cplx G;     // current spinor-square value (x-chart)
};

TransportState transport_start(const Config& c, const SurfacePoint& p);
void transport_advance(const Config& c, TransportState& st, cplx x_next);

// phi in the x-chart at the transported state (overall constant fixed by the
// reference branches; g = 1 uses the degenerate-limit exponent).
cplx phi_x(const Config& c, const TransportState& st);

// phi value at a point (fresh anchor; path class per the curve conventions).
cplx phi_eval(const Config& c, const SurfacePoint& p);

// Higher-genus SB residuals at the zeros x_1..x_{n-1}, in the declared charts.
std::vector<cplx> sb_residual(const Config& c);

// Quadrature oracle: res|_{x_k} phi^{-2} (the 1-form) in the zero charts,
// together with the leading coefficient a_k = lim phi_chart/xi so callers can
// compare against 2 * residual_k / a_k^2.
struct ResidueOracle {
  std::vector<cplx> residue;
  std::vector<cplx> lead;
};
ResidueOracle residue_oracle(const Config& c, double tol = 1e-9);

// tau_YY (ordered-pair prime-form product, paper normalization).
cplx tau_yy(const Config& c);
// tau_YY with divisor point `which` displaced by xi in its chart (for the
// generating-function identities; references stay anchored).
cplx tau_yy_displaced(const Config& c, int which, cplx xi);

// Accessory parameters H_k in the declared pole charts.
std::vector<cplx> accessory(const Config& c);

// All 2g cycle periods of phi^{-2} plus the n-1 zero residues.
struct PeriodReport {
  std::vector<cplx> a_periods, b_periods;
  std::vector<cplx> residues;
};
PeriodReport period_conditions(const Config& c, double tol = 1e-8);

// Holonomy of phi around a stored cycle: returns phi_end / phi_start.
cplx cycle_holonomy(const Config& c, const hyper::TrackedPath& cycle);

// tau_B^{3/2} for a configuration induced by an actual covering map.
struct TauB {
  cplx value;
  cplx Q;                    // the x-independent factor, at the first sample
  double Q_spread = 0.0;     // relative spread across the samples
  std::vector<cplx> jacobians;  // d zeta/d xi at the divisor points (1 if degenerate)
};
TauB tau_b_three_halves(const Config& c, const CurveMap& F,
                        const std::vector<cplx>& samples, double q_tol = 1e-4);

// Dimension bookkeeping of the monodromy-free moduli space.
struct DimensionCount {
  int parameters = 0;  // 2g - 3 + n + m
  int conditions = 0;  // 2g + n - 1
  int dimension = 0;   // m - 2
};
DimensionCount dimension_count(int g, int m, int n, const std::vector<int>& orders);

// Admissible random configuration on a fixed curve: poles and n - g zeros
// random, the last g zeros from Jacobi inversion of the canonicity target.
Config random_config(std::shared_ptr<const Curve> curve,
                     const std::vector<int>& orders, std::mt19937_64& rng);

}  // namespace genusg
}  // namespace bethe

#endif
