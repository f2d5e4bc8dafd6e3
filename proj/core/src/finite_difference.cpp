#include "pmvb/finite_difference.hpp"

namespace pmvb {

FiniteDifferenceOperator::FiniteDifferenceOperator(GridDims dims)
    : LinearOperator(dims.size(), 2 * dims.size()), dims_(dims) {
  if (dims.height < 2 || dims.width < 2)
    throw DimensionError("FiniteDifferenceOperator: dims must be at least 2x2");
}

void FiniteDifferenceOperator::do_apply(ConstVecRef x, VecRef y) const {
  const int h = dims_.height, w = dims_.width;
  const Index n = dims_.size();
  for (int i = 0; i < h; ++i) {
    const Index r = Index(i) * w;
    for (int j = 0; j < w - 1; ++j) y[r + j] = x[r + j + 1] - x[r + j];
    y[r + w - 1] = x[r] - x[r + w - 1];
  }
  for (int i = 0; i < h; ++i) {
    const Index r = Index(i) * w;
    const Index rn = Index((i + 1) % h) * w;
    y.segment(n + r, w) = x.segment(rn, w) - x.segment(r, w);
  }
}

void FiniteDifferenceOperator::do_apply_adjoint(ConstVecRef y, VecRef x) const {
  const int h = dims_.height, w = dims_.width;
  const Index n = dims_.size();
  x.setZero();
  for (int i = 0; i < h; ++i) {
    const Index r = Index(i) * w;
    for (int j = 0; j < w - 1; ++j) {
      x[r + j + 1] += y[r + j];
      x[r + j] -= y[r + j];
    }
    x[r] += y[r + w - 1];
    x[r + w - 1] -= y[r + w - 1];
  }
  for (int i = 0; i < h; ++i) {
    const Index r = Index(i) * w;
    const Index rn = Index((i + 1) % h) * w;
    x.segment(rn, w) += y.segment(n + r, w);
    x.segment(r, w) -= y.segment(n + r, w);
  }
}

std::shared_ptr<const FiniteDifferenceOperator> finite_difference_operator(GridDims dims) {
  return std::make_shared<const FiniteDifferenceOperator>(dims);
}

}  // namespace pmvb
