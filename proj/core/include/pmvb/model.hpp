#pragma once

#include <optional>

#include "pmvb/image.hpp"
#include "pmvb/linear_operator.hpp"
#include "pmvb/potentials.hpp"

namespace pmvb {

/// Stationary structure of a model whose H comes from periodic convolution
/// and whose G is the first-difference pair on the same grid. Required by
/// the circulant preconditioner and the Fourier-domain log-determinant.
struct StationaryStructure {
  Kernel kernel;
  GridDims dims;
};

/// The sparse linear model: Gaussian likelihood y ~ N(Hx, sigma^2 I) plus
/// heavy-tailed potentials t_k on the filter responses s = Gx.
struct SparseLinearModel {
  OperatorPtr h;                  // M x N measurement operator
  OperatorPtr g;                  // K x N sparsity filter bank
  double sigma2 = 1.0;            // noise variance
  Potentials potentials;          // one per row of G (shared family allowed)
  Vec y;                          // observations, length M
  std::optional<StationaryStructure> stationary;

  Index n() const { return h->in_dim(); }
  Index m() const { return h->out_dim(); }
  Index k() const { return g->out_dim(); }

  void validate() const {
    if (!h || !g) throw DimensionError("SparseLinearModel: missing operators");
    if (h->in_dim() != g->in_dim())
      throw DimensionError("SparseLinearModel: H and G disagree on N");
    if (y.size() != m()) throw DimensionError("SparseLinearModel: y length != M");
    if (sigma2 <= 0.0) throw DomainError("SparseLinearModel: sigma2 must be positive");
    if (potentials.rows() != k())
      throw DimensionError("SparseLinearModel: potentials rows != K");
  }
};

}  // namespace pmvb
