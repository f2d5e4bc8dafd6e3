#pragma once

#include <vector>

#include "pmvb/common.hpp"
#include "pmvb/errors.hpp"

namespace pmvb {

/// Even super-Gaussian sparsity potential t(s), expressible as a supremum
/// of scaled Gaussians. Two families:
///   Laplacian:  t(s) = exp(-tau * |s|)
///   StudentT:   t(s) = (1 + s^2 / (nu * scale^2))^(-(nu+1)/2)
/// log t is concave for the Laplacian, which is what the convexity and
/// global-convergence guarantees of the double loop rely on.
struct SuperGaussianPotential {
  enum class Family { Laplacian, StudentT };

  Family family = Family::Laplacian;
  double tau = 15.0;    // Laplacian rate
  double nu = 3.0;      // StudentT degrees of freedom
  double scale = 1.0;   // StudentT scale

  static SuperGaussianPotential laplacian(double tau);
  static SuperGaussianPotential student_t(double nu, double scale = 1.0);
};

/// log t(s).
double log_potential(const SuperGaussianPotential& pot, double s);

/// Dual coordinate h(gamma) = sup_s [ -s^2/gamma - 2 log t(s) ].
/// Laplacian closed form: tau^2 * gamma. Other families are computed by a
/// guarded 1-D numeric maximization; a bracketing failure throws DomainError
/// describing the bracket state.
double h_dual(const SuperGaussianPotential& pot, double gamma);

/// Minimizer recovery: gamma^{-1} = -2 d log t(sqrt(v))/dv evaluated at v.
/// This is the argmin of gamma -> v/gamma + h(gamma) for fixed v > 0.
/// Laplacian: tau / sqrt(v).
double gamma_update(const SuperGaussianPotential& pot, double v);

/// Per-row potential bank; a single shared potential is stored once.
class Potentials {
 public:
  Potentials() = default;
  static Potentials shared(SuperGaussianPotential pot, Index rows);
  static Potentials per_row(std::vector<SuperGaussianPotential> pots);

  Index rows() const { return rows_; }
  const SuperGaussianPotential& at(Index k) const {
    return shared_ ? pots_.front() : pots_[static_cast<size_t>(k)];
  }

 private:
  std::vector<SuperGaussianPotential> pots_;
  Index rows_ = 0;
  bool shared_ = true;
};

}  // namespace pmvb
