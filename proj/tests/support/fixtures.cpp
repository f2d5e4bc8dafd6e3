#include "fixtures.hpp"

#include <cmath>

#include "pmvb/conv2.hpp"
#include "pmvb/rng.hpp"
#include "pmvb/varbayes.hpp"

namespace pmvb::testing {

ImagePlane make_phantom(int height, int width) {
  ImagePlane img(height, width);
  const double h = height, w = width;
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      double v = 0.15 + 0.12 * (i / h) + 0.08 * (j / w);
      if (i >= 0.12 * h && i < 0.42 * h && j >= 0.10 * w && j < 0.38 * w) v = 0.85;
      if (i >= 0.20 * h && i < 0.32 * h && j >= 0.16 * w && j < 0.26 * w) v = 0.35;
      const double di = i - 0.66 * h, dj = j - 0.62 * w;
      if (di * di + dj * dj < 0.030 * h * w) v = 0.70;
      if (std::abs((i - 0.1 * h) - (j - 0.55 * w)) < 0.025 * (h + w)) v = 0.50;
      if (i >= 0.78 * h && i < 0.86 * h && j >= 0.08 * w && j < 0.90 * w) v = 0.92;
      img.at(i, j) = v;
    }
  return img;
}

Kernel make_motion_kernel(int size, double angle_deg) {
  Kernel k(size, size);
  const double theta = angle_deg * M_PI / 180.0;
  const double c = size / 2.0 - 0.5 + 0.5;  // center in tap coordinates
  const double half = (size - 1) / 2.0;
  const int steps = 64 * size;
  for (int s = 0; s <= steps; ++s) {
    const double t = -half + (2.0 * half) * s / steps;
    const double x = c - 0.5 + t * std::cos(theta);
    const double y = c - 0.5 + t * std::sin(theta);
    const int i0 = int(std::floor(y)), j0 = int(std::floor(x));
    const double fi = y - i0, fj = x - j0;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        const int i = i0 + di, j = j0 + dj;
        if (i < 0 || j < 0 || i >= size || j >= size) continue;
        const double wgt = (di ? fi : 1 - fi) * (dj ? fj : 1 - fj);
        k.taps[Index(i) * size + j] += wgt;
      }
  }
  k.taps /= k.taps.sum();
  return k;
}

Kernel make_gaussian_kernel(int size, double sigma) {
  Kernel k(size, size);
  const int c = size / 2;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      k.taps[Index(i) * size + j] =
          std::exp(-0.5 * ((i - c) * (i - c) + (j - c) * (j - c)) / (sigma * sigma));
  k.taps /= k.taps.sum();
  return k;
}

Kernel make_box_kernel(int height, int width) {
  Kernel k(height, width);
  k.taps.setConstant(1.0 / (double(height) * width));
  return k;
}

Mat random_spd(Index n, std::uint64_t seed, double cond) {
  NormalStream stream(seed, 0);
  Mat m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = stream.next();
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ();
  Vec eigs(n);
  for (Index i = 0; i < n; ++i)
    eigs[i] = std::pow(cond, -(double(i) / std::max<Index>(1, n - 1)));
  return q * eigs.asDiagonal() * q.transpose();
}

SyntheticDeblur make_synthetic_deblur(int obs_h, int obs_w, const Kernel& kernel,
                                      double noise_var, std::uint64_t seed, double tau,
                                      double sigma2) {
  SyntheticDeblur out;
  const GridDims ext{obs_h + kernel.height - 1, obs_w + kernel.width - 1};
  out.truth_ext = make_phantom(ext.height, ext.width);
  out.truth_ext.domain = ImagePlane::Domain::Extended;

  auto conv = conv2_operator(kernel, ext);
  Vec blurred = conv->apply(out.truth_ext.values);

  ImagePlane observed(obs_h, obs_w);
  out.truth = ImagePlane(obs_h, obs_w);
  const int r0 = kernel.height / 2, c0 = kernel.width / 2;
  NormalStream noise(seed, 0);
  const double sd = std::sqrt(noise_var);
  for (int i = 0; i < obs_h; ++i)
    for (int j = 0; j < obs_w; ++j) {
      const Index p = Index(i + r0) * ext.width + (c0 + j);
      out.truth.at(i, j) = out.truth_ext.values[p];
      observed.at(i, j) = blurred[p] + sd * noise.next();
    }

  out.problem = DeblurProblem::make(std::move(observed), kernel, tau, sigma2);
  return out;
}

Vec random_gamma(Index k, std::uint64_t seed, double lo, double hi) {
  NormalStream stream(seed, 1);
  Vec g(k);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (Index i = 0; i < k; ++i) {
    // map a normal through its cdf for a cheap uniform
    const double u = 0.5 * std::erfc(-stream.next() / std::sqrt(2.0));
    g[i] = std::exp(llo + (lhi - llo) * u);
  }
  return g;
}

Vec vb_gamma(const SparseLinearModel& model, int outer_iters, std::uint64_t seed) {
  VbConfig cfg;
  cfg.outer_iters = outer_iters;
  cfg.seed = seed;
  cfg.track_free_energy = false;
  return vb_fit(model, cfg).state.gamma;
}

}  // namespace pmvb::testing
