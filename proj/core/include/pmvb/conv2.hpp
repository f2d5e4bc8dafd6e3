#pragma once

#include "pmvb/image.hpp"
#include "pmvb/linear_operator.hpp"

namespace pmvb {

/// Periodic (circular) 2-D convolution on a fixed grid:
///   (H x)[p] = sum_a k[a] * x[p - a]   (indices wrap mod dims).
/// The adjoint is correlation, i.e. convolution with the flipped kernel.
class Conv2Operator final : public LinearOperator {
 public:
  Conv2Operator(Kernel kernel, GridDims dims);

  const Kernel& kernel() const { return kernel_; }
  GridDims dims() const { return dims_; }

 private:
  void do_apply(ConstVecRef x, VecRef y) const override;
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override;

  Kernel kernel_;
  GridDims dims_;
};

std::shared_ptr<const Conv2Operator> conv2_operator(const Kernel& kernel, GridDims dims);

}  // namespace pmvb
