#pragma once

#include "pmvb/linear_operator.hpp"

namespace pmvb {

/// First-order forward differences with periodic wrap, both orientations
/// stacked: rows [0, N) are horizontal differences x[i, j+1] - x[i, j] and
/// rows [N, 2N) are vertical differences x[i+1, j] - x[i, j]. K = 2N.
/// Nullspace is exactly the constant images.
class FiniteDifferenceOperator final : public LinearOperator {
 public:
  explicit FiniteDifferenceOperator(GridDims dims);

  GridDims dims() const { return dims_; }

 private:
  void do_apply(ConstVecRef x, VecRef y) const override;
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override;

  GridDims dims_;
};

std::shared_ptr<const FiniteDifferenceOperator> finite_difference_operator(GridDims dims);

}  // namespace pmvb
