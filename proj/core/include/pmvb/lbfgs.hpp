#pragma once

#include <functional>
#include <vector>

#include "pmvb/common.hpp"

namespace pmvb {

/// Objective contract: writes the gradient into `grad` and returns f(x).
using ObjectiveFn = std::function<double(ConstVecRef x, VecRef grad)>;

struct LbfgsOptions {
  double grad_tol = 1e-5;   // on the gradient infinity norm
  int max_iter = 500;
  int memory = 10;
  int max_line_search = 30;
};

struct LbfgsResult {
  Vec x;
  double f = 0.0;
  Vec grad;
  std::vector<double> f_trace;  // f at x0 followed by f after each accepted step
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;  // best iterate returned with warning
};

/// Limited-memory BFGS with a strong-Wolfe line search (sufficient decrease
/// and curvature conditions), so the f trace is monotone non-increasing.
/// If the line search fails max_line_search trials the best iterate so far
/// is returned with line_search_failed set.
LbfgsResult lbfgs_minimize(const ObjectiveFn& f_and_grad, const Vec& x0,
                           const LbfgsOptions& opts = {});

}  // namespace pmvb
