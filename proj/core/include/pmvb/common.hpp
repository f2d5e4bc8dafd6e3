#pragma once

#include <Eigen/Dense>

namespace pmvb {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vec>;
using ConstVecRef = Eigen::Ref<const Vec>;

/// 2-D grid extent. All grids in this library are flattened row-major:
/// pixel (i, j) lives at index i * width + j.
struct GridDims {
  int height = 0;
  int width = 0;

  Index size() const { return static_cast<Index>(height) * width; }
  bool operator==(const GridDims&) const = default;
};

}  // namespace pmvb
