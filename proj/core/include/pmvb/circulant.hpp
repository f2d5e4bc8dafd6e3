#pragma once

#include <memory>

#include "pmvb/fft2.hpp"
#include "pmvb/image.hpp"
#include "pmvb/pcg.hpp"

namespace pmvb {

struct SparseLinearModel;

/// An SPD reference matrix with a computable log-determinant; what the
/// Monte-Carlo log-determinant estimator compares a system against.
class SpdReference {
 public:
  virtual ~SpdReference() = default;
  virtual void apply(ConstVecRef x, VecRef y) const = 0;
  virtual double log_det() const = 0;
};

/// Stationary approximation of a deblurring system matrix,
///   P = sigma^{-2} H^T H + gamma_bar_inv * G^T G,
/// with H periodic convolution by `kernel` and G the first-difference pair.
/// P is diagonalized by the 2-D DFT, so P^{-1} x, P x and log|P| are all
/// cheap in the Fourier domain. Among stationary matrices P is the one
/// nearest in Frobenius norm to the heterogeneous system matrix it
/// approximates. All entries of the eigenvalue grid must be positive.
class CirculantPreconditioner final : public Preconditioner, public SpdReference {
 public:
  CirculantPreconditioner(const Kernel& kernel, GridDims dims, double sigma2,
                          double gamma_bar_inv);

  void apply_inverse(ConstVecRef r, VecRef z) const override;
  void apply(ConstVecRef x, VecRef y) const override;
  double log_det() const override { return log_det_; }

  double gamma_bar_inv() const { return gamma_bar_inv_; }
  GridDims dims() const { return dims_; }

 private:
  GridDims dims_;
  double gamma_bar_inv_;
  Fft2 fft_;
  Vec eigenvalues_;  // half spectrum, height x (width/2+1), row-major
  double log_det_ = 0.0;
};

/// Builds the preconditioner for a stationary-structured model at the given
/// gamma, using gamma_bar_inv = mean(1/gamma_k).
std::shared_ptr<const CirculantPreconditioner> circulant_preconditioner(
    const SparseLinearModel& model, ConstVecRef gamma);

}  // namespace pmvb
