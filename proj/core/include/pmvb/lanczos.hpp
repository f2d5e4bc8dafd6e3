#pragma once

#include <cstdint>

#include "pmvb/linear_operator.hpp"

namespace pmvb {

struct LanczosResult {
  Vec z;                  // marginal-variance estimates for s = Gx, x ~ N(0, A^{-1})
  int iterations = 0;     // Krylov steps actually taken
  bool breakdown = false; // beta fell below 1e-13 before n_iter steps
};

/// Lanczos variance estimation baseline with full reorthogonalization.
/// After j steps with orthonormal basis V_j and tridiagonal T_j = V_j^T A V_j,
/// the estimate is z = rowwise_sqnorm(G V_j L_j^{-T}) with T_j = L_j L_j^T.
/// Estimates grow monotonically with j and underestimate the exact variances
/// (they are a projection of A^{-1} onto the Krylov subspace). The start
/// vector is i.i.d. Gaussian drawn from `seed`.
LanczosResult lanczos_variance(const LinearOperator& a, const LinearOperator& g,
                               int n_iter, std::uint64_t seed);

}  // namespace pmvb
