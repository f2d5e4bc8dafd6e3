#include "pmvb/dense.hpp"

#include <string>

namespace pmvb {

Mat materialize_dense(const LinearOperator& op, Index max_entries) {
  const Index n = op.in_dim(), m = op.out_dim();
  if (m * n > max_entries)
    throw SizeGuardError("materialize_dense: " + std::to_string(m) + "x" +
                         std::to_string(n) + " exceeds guard of " +
                         std::to_string(max_entries) + " entries");
  Mat out(m, n);
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, out.col(j));
    e[j] = 0.0;
  }
  return out;
}

}  // namespace pmvb
