#ifndef BETHE_ELLIPTIC_HPP
#define BETHE_ELLIPTIC_HPP

// Genus-1 theory on the torus with modulus sigma: theta_1 evaluation with
// lattice reduction, the elliptic Stieltjes-Bethe system, period conditions,
// tau_YY, accessory parameters and potential assembly.

#include <random>
#include <vector>

#include "core/numkit.hpp"

namespace bethe {
namespace elliptic {

// theta_1(x) = theta[1/2,1/2](x, sigma); argument reduced to the fundamental
// cell with the quasi-periodicity prefactor.  der <= 3 selects d^der/dx^der.
cplx theta1(cplx x, cplx sigma, double tol = 1e-14);
cplx theta1_d(int der, cplx x, cplx sigma, double tol = 1e-14);

// term-wise sigma-derivative of the series (for the heat-equation check)
cplx theta1_dsigma(cplx x, cplx sigma, double tol = 1e-14);

// f = theta_1'/theta_1 and its derivative (both elliptic up to constants)
cplx log_deriv(cplx x, cplx sigma, double tol = 1e-14);
cplx log_deriv_prime(cplx x, cplx sigma, double tol = 1e-14);

// Divisor data on the torus: zeros x_1..x_n, poles y_1..y_m with orders r_j,
// integers beta1/beta2 balancing -sum x + sum r y + beta1 sigma + beta2 = 0.
struct Config {
  cplx sigma;
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  std::vector<int> orders;
  int beta1 = 0, beta2 = 0;

  Config(cplx sigma, std::vector<cplx> zeros, std::vector<cplx> poles,
         std::vector<int> orders, int beta1, int beta2);

  // completes the last zero from the balance condition
  static Config balanced(cplx sigma, std::vector<cplx> zeros_head,
                         std::vector<cplx> poles, std::vector<int> orders,
                         int beta1, int beta2);

  int n() const { return static_cast<int>(zeros.size()); }
  int m() const { return static_cast<int>(poles.size()); }
};

// Scalar part of phi; the exponential carries exp(-2 pi i beta1 x) so that
// phi is single-valued on the torus under the balance convention above.
cplx phi_eval(const Config& c, cplx x, double tol = 1e-14);
cplx phi_log_deriv(const Config& c, cplx x, double tol = 1e-14);

// Left-hand sides of the elliptic SB equations at x_1..x_{n-1}, including
// the +2 pi i beta1 term that makes them exactly proportional to the
// residues of dx/phi^2.
std::vector<cplx> sb_residual(const Config& c, double tol = 1e-14);

// Residues of dx/phi^2 at x_1..x_{n-1} by contour quadrature (oracle).
std::vector<cplx> residue_check(const Config& c, double tol = 1e-11);

// Periods of dx/phi^2 over [p, p+1] and [p, p+sigma]; the base point is
// shifted away from the zeros automatically (PathThroughPole after 16 tries).
std::pair<cplx, cplx> period_conditions(const Config& c, cplx base_hint = cplx(0.1283, 0.2131),
                                        double tol = 1e-11);

// tau_YY = prod_{i<j} theta_1^{d_i d_j}(p_i - p_j).
cplx tau_yy(const Config& c, double tol = 1e-14);

// H_k = 2 r_k ( sum_{l != k} r_l f(y_k-y_l) - sum_j f(y_k-x_j) ).
std::vector<cplx> accessory(const Config& c, double tol = 1e-14);

// u(x) = sum_k [ -r_k(r_k+1) f'(x-y_k) + H_k f(x-y_k) ] + C with C fitted
// from u = (phi'/phi)' + (phi'/phi)^2 at one sample point.
struct PotentialElliptic {
  Config config;
  std::vector<cplx> H;
  cplx C = 0.0;
  bool sb_ok = true;  // residual below tolerance at construction
  cplx eval(cplx x, double tol = 1e-14) const;
  cplx eval_direct(cplx x, double tol = 1e-14) const;  // (phi'/phi)' + (phi'/phi)^2
};
PotentialElliptic make_potential(const Config& c, double sb_tol = 1e-8);

// Random admissible configuration (balance enforced, beta1 in {-1,0,1}).
Config random_config(int max_n, std::mt19937_64& rng);

// Solve the elliptic SB system for the zeros at fixed poles/curve, keeping
// the balance constraint; used by tests and the CLI solve path.
std::vector<Config> solve_sb(cplx sigma, const std::vector<cplx>& poles,
                             const std::vector<int>& orders, int beta1, int beta2,
                             double tol = 1e-12, int seeds = 64,
                             unsigned long seed = 4242ul);

// distance on the torus (minimum over lattice translates)
double lattice_distance(cplx d, cplx sigma);

}  // namespace elliptic
}  // namespace bethe

#endif
