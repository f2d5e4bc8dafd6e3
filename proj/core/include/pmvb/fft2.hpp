#pragma once

#include <complex>
#include <vector>

#include "pmvb/common.hpp"

namespace pmvb {

/// Real 2-D DFT of a fixed grid size (row-major, height x width).
/// Plans are created once per instance; forward()/inverse() execute on
/// caller-provided buffers and are safe to call concurrently on distinct
/// buffers. The half spectrum has height x (width/2 + 1) complex entries.
class Fft2 {
 public:
  Fft2(int height, int width);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  int height() const { return h_; }
  int width() const { return w_; }
  int spectrum_cols() const { return w_ / 2 + 1; }
  Index spectrum_size() const { return Index(h_) * spectrum_cols(); }

  void forward(const double* in, std::complex<double>* out) const;
  /// Normalized inverse (scales by 1/(height*width)). Clobbers `in`.
  void inverse(std::complex<double>* in, double* out) const;

  /// Circular cross-correlation c[a] = sum_p u[p] * v[p - a], full grid out.
  void correlate(const Vec& u, const Vec& v, Vec& out) const;

 private:
  int h_, w_;
  void* fwd_plan_;
  void* inv_plan_;
};

}  // namespace pmvb
