#pragma once

#include "pmvb/varbayes.hpp"

namespace pmvb {

struct CropWindow {
  int row0 = 0;
  int col0 = 0;
  int height = 0;
  int width = 0;
};

/// Non-blind / blind deconvolution problem. The latent image lives on an
/// extended periodic domain (observed + kernel - 1 per axis) with the
/// observed window centered; the likelihood only covers observed pixels.
struct DeblurProblem {
  ImagePlane observed;
  Kernel kernel;
  GridDims extended;
  double tau = 15.0;
  double sigma2 = 1e-5;
  double lambda1 = 1e-3;  // L1 weight on the kernel in the M-step
  CropWindow score_crop;  // within the observed image, for PSNR

  static DeblurProblem make(ImagePlane observed, Kernel kernel, double tau = 15.0,
                            double sigma2 = 1e-5, double lambda1 = 1e-3);

  /// Top-left corner of the observed window inside the extended domain.
  int pad_row0() const { return kernel.height / 2; }
  int pad_col0() const { return kernel.width / 2; }

  void validate() const;
};

/// H = crop-to-observed composed with periodic convolution by the kernel,
/// G = first differences on the extended domain, Laplacian potentials
/// (tau), y = the observed pixels. Carries the stationary structure for the
/// circulant preconditioner.
SparseLinearModel build_tv_model(const DeblurProblem& problem);

struct NonblindResult {
  ImagePlane mean;    // posterior mean, observed window
  ImagePlane stdev;   // pointwise posterior stdev, observed window
  VariationalState state;
  SampleBatch batch;  // final-gamma batch the stdev map came from
};

/// Runs the double loop at a known kernel; the stdev map is the square root
/// of the per-pixel Monte-Carlo variances from the final sample batch.
NonblindResult deblur_nonblind(const DeblurProblem& problem, const VbConfig& cfg);

struct MStepResult {
  Kernel kernel;
  double objective = 0.0;        // 0.5 k'Rk - r'k + lambda1 ||k||_1 at the result
  double objective_at_init = 0.0;
  bool psd_floored = false;
  int iterations = 0;
};

/// M-step kernel update: builds the kernel-support quadratic
///   R[a,b] = sum_p m_p E[x_{p-a} x_{p-b}],  r[a] = sum_p y_p xhat_{p-a},
/// with E[x_u x_v] = xhat_u xhat_v + (1/n) sum_i x_i[u] x_i[v] over the first
/// `max_samples` accepted batch samples, everything via FFT correlations
/// (never densified beyond kernel support). Minimizes the L1-penalized
/// quadratic over k >= 0 by proximal gradient iterations, then polishes on
/// the simplex restricted to the recovered support; the returned kernel has
/// k >= 0 and sum k = 1.
MStepResult m_step_kernel(const SampleBatch& batch, const Vec& xhat,
                          const ImagePlane& observed, GridDims extended, int kernel_height,
                          int kernel_width, double lambda1, int max_samples = 2,
                          const Kernel* k_init = nullptr);

struct EmIterRecord {
  Kernel kernel;                 // kernel after this iteration's M-step
  double mstep_objective = 0.0;  // at the updated kernel
  double mstep_objective_at_previous = 0.0;
  double phi_final = 0.0;        // last free-energy entry of the E-step, 0 if untracked
};

struct KernelEmTrace {
  Kernel initial;
  std::vector<EmIterRecord> iterations;
};

struct EmConfig {
  int em_iters = 10;
  int mstep_samples = 2;
  VbConfig e_step;
};

struct BlindResult {
  Kernel kernel;
  ImagePlane mean;
  KernelEmTrace trace;
};

/// EM blind deconvolution: E-step = variational inference at the current
/// kernel, M-step = the quadratic kernel update above.
BlindResult em_blind_deblur(const DeblurProblem& problem, const Kernel& k0,
                            const EmConfig& cfg);

/// 10 log10(1 / MSE) over the crop, peak 1.0; +inf when MSE = 0.
double psnr(const ImagePlane& x, const ImagePlane& reference, const CropWindow& crop);

}  // namespace pmvb
