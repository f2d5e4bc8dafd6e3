#pragma once

#include <cstdint>

#include "pmvb/deblur.hpp"
#include "pmvb/model.hpp"

namespace pmvb::testing {

/// Deterministic piecewise-smooth test image: gentle ramp background with
/// rectangles, a disc and a bar. Values in (0, 1).
ImagePlane make_phantom(int height, int width);

/// Line blur through the kernel center at the given angle, normalized.
Kernel make_motion_kernel(int size, double angle_deg);

Kernel make_gaussian_kernel(int size, double sigma);
Kernel make_box_kernel(int height, int width);

/// Random SPD matrix with log-spaced spectrum in [1/cond, 1].
Mat random_spd(Index n, std::uint64_t seed, double cond = 100.0);

struct SyntheticDeblur {
  DeblurProblem problem;
  ImagePlane truth;      // observed-domain ground truth
  ImagePlane truth_ext;  // extended-domain latent image
};

/// Model-consistent instance: a phantom on the extended domain, blurred
/// periodically, cropped to the observed window, plus Gaussian noise of
/// variance noise_var.
SyntheticDeblur make_synthetic_deblur(int obs_h, int obs_w, const Kernel& kernel,
                                      double noise_var, std::uint64_t seed,
                                      double tau = 15.0, double sigma2 = 1e-5);

/// Log-uniform heterogeneous gamma in [lo, hi].
Vec random_gamma(Index k, std::uint64_t seed, double lo = 1e-3, double hi = 1.0);

/// Realistic heterogeneous gamma: a short Monte-Carlo double-loop run on the
/// model, returning its final gamma.
Vec vb_gamma(const SparseLinearModel& model, int outer_iters, std::uint64_t seed);

}  // namespace pmvb::testing
