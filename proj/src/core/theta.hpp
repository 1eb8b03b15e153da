#ifndef BETHE_THETA_HPP
#define BETHE_THETA_HPP

// Genus-generic Riemann theta function: values, derivatives up to fourth
// order, half-integer characteristics.  Lattice sums run over an ellipsoidal
// index set sized from the Gaussian tail bound; the argument is always
// reduced to the fundamental domain first.

#include <vector>

#include "core/numkit.hpp"

namespace bethe {

using cvec = std::vector<cplx>;
using cmat = std::vector<std::vector<cplx>>;

struct PeriodMatrix {
  cmat omega;  // g x g, symmetric, Im positive definite

  explicit PeriodMatrix(cmat m);
  int genus() const { return static_cast<int>(omega.size()); }

  const std::vector<std::vector<double>>& im() const { return im_; }
  double min_im_eigenvalue() const { return min_eig_; }

private:
  std::vector<std::vector<double>> im_;
  double min_eig_ = 0.0;
};

struct ThetaCharacteristic {
  std::vector<double> b1, b2;  // entries in {0, 1/2} (any half-integers accepted)
  int parity() const;          // 4 <b1,b2> mod 2: 0 even, 1 odd
};

// Theta(z) = sum over Z^g of exp(pi i <n, Omega n> + 2 pi i <n, z>).
cplx theta(const cvec& z, const PeriodMatrix& om, double tol = 1e-12);

// Term-wise differentiated lattice sum; |alpha| <= 4.
cplx theta_deriv(const std::vector<int>& alpha, const cvec& z,
                 const PeriodMatrix& om, double tol = 1e-12);

// theta[b1,b2](z) = exp(pi i <b1,Om b1> + 2 pi i <b1, z+b2>) Theta(z+Om b1+b2).
cplx theta_char(const ThetaCharacteristic& ch, const cvec& z,
                const PeriodMatrix& om, double tol = 1e-12);

// Derivative of theta_char in z_j (term-wise, via the shifted lattice sum).
cplx theta_char_deriv(const ThetaCharacteristic& ch, int j, const cvec& z,
                      const PeriodMatrix& om, double tol = 1e-12);

// All half-integer characteristics of genus g in lexicographic order.
std::vector<ThetaCharacteristic> all_half_characteristics(int g);

}  // namespace bethe

#endif
