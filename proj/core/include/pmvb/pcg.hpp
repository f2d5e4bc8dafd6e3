#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmvb/linear_operator.hpp"

namespace pmvb {

/// Abstract preconditioner: z = P^{-1} r. Must be shareable across
/// concurrent solves (no shared mutable state in apply_inverse).
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply_inverse(ConstVecRef r, VecRef z) const = 0;
};

struct PcgOptions {
  double tol = 1e-6;      // relative residual target
  int max_iter = 1000;
  /// When true, runs exactly max_iter iterations regardless of tol
  /// (the fixed-budget mode used for sampling).
  bool fixed_iterations = false;
  /// Recompute the true residual b - Ax every this many iterations to
  /// defeat recurrence drift.
  int true_residual_every = 25;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> relres_trace;  // one entry per iteration
  bool converged = false;
  double wall_time_s = 0.0;

  double final_relres() const {
    return relres_trace.empty() ? 1.0 : relres_trace.back();
  }
};

struct PcgResult {
  Vec x;
  SolveReport report;
};

/// Preconditioned conjugate gradients for SPD A (caller's responsibility).
/// Convergence is measured on the residual recurrence ||r|| / ||b||.
/// Throws SolverError naming the iteration if non-finite values appear.
PcgResult pcg_solve(const LinearOperator& a, ConstVecRef b,
                    const Preconditioner* precond, const PcgOptions& opts);

}  // namespace pmvb
