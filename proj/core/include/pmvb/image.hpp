#pragma once

#include <cmath>

#include "pmvb/common.hpp"
#include "pmvb/errors.hpp"

namespace pmvb {

/// A 2-D grid of real values, flattened row-major. Values are nominally in
/// [0,1] but that is not enforced. The domain tag records whether the grid
/// covers the observed pixels or the padded extended domain used by the
/// periodic operators.
struct ImagePlane {
  enum class Domain { Observed, Extended };

  int height = 0;
  int width = 0;
  Domain domain = Domain::Observed;
  Vec values;

  ImagePlane() = default;
  ImagePlane(int h, int w, Domain d = Domain::Observed)
      : height(h), width(w), domain(d), values(Vec::Zero(Index(h) * w)) {
    if (h <= 0 || w <= 0) throw DimensionError("ImagePlane: non-positive dims");
  }

  GridDims dims() const { return {height, width}; }
  Index size() const { return Index(height) * width; }

  double& at(int i, int j) { return values[Index(i) * width + j]; }
  double at(int i, int j) const { return values[Index(i) * width + j]; }
};

/// Convolution kernel with odd extent along both axes; tap offsets run over
/// [-height/2, height/2] x [-width/2, width/2] with the center tap at (0,0).
struct Kernel {
  int height = 0;
  int width = 0;
  Vec taps;

  Kernel() = default;
  Kernel(int h, int w) : height(h), width(w), taps(Vec::Zero(Index(h) * w)) {
    validate_dims();
  }
  Kernel(int h, int w, Vec t) : height(h), width(w), taps(std::move(t)) {
    validate_dims();
    if (taps.size() != Index(h) * w)
      throw DimensionError("Kernel: taps length does not match dims");
    if (!taps.allFinite()) throw DomainError("Kernel: non-finite taps");
  }

  int center_row() const { return height / 2; }
  int center_col() const { return width / 2; }

  /// Tap at offset (di, dj), di in [-height/2, height/2].
  double& at_offset(int di, int dj) {
    return taps[Index(di + center_row()) * width + (dj + center_col())];
  }
  double at_offset(int di, int dj) const {
    return taps[Index(di + center_row()) * width + (dj + center_col())];
  }

  double sum() const { return taps.sum(); }

  /// Simplex check used on blind-deblur outputs: taps >= 0 and sum == 1.
  bool on_simplex(double tol = 1e-9) const {
    return taps.minCoeff() >= -tol && std::abs(sum() - 1.0) <= tol;
  }

  static Kernel identity() {
    Kernel k(1, 1);
    k.taps[0] = 1.0;
    return k;
  }

 private:
  void validate_dims() const {
    if (height <= 0 || width <= 0 || height % 2 == 0 || width % 2 == 0)
      throw DimensionError("Kernel: dims must be odd and positive");
  }
};

}  // namespace pmvb
