#pragma once

#include "pmvb/linear_operator.hpp"

namespace pmvb {

/// Materializes an operator column by column (column j = op(e_j)).
/// Desk-scale oracle support; guarded by entry count.
Mat materialize_dense(const LinearOperator& op, Index max_entries = 4'000'000);

}  // namespace pmvb
