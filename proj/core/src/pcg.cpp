#include "pmvb/pcg.hpp"

#include <chrono>
#include <cmath>

#include "pmvb/errors.hpp"

namespace pmvb {

PcgResult pcg_solve(const LinearOperator& a, ConstVecRef b,
                    const Preconditioner* precond, const PcgOptions& opts) {
  if (a.in_dim() != a.out_dim() || b.size() != a.in_dim())
    throw DimensionError("pcg_solve: dimension mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  const Index n = b.size();
  const double bnorm = b.norm();

  PcgResult res;
  res.x = Vec::Zero(n);
  if (bnorm == 0.0) {
    res.report.converged = true;
    return res;
  }

  Vec r = b;  // r = b - A*0
  Vec z(n), p(n), ap(n);
  if (precond)
    precond->apply_inverse(r, z);
  else
    z = r;
  p = z;
  double rz = r.dot(z);

  for (int it = 1; it <= opts.max_iter; ++it) {
    a.apply(p, ap);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || pap <= 0.0)
      throw SolverError("pcg_solve: non-positive or non-finite curvature at iteration " +
                            std::to_string(it),
                        it);
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;

    if (opts.true_residual_every > 0 && it % opts.true_residual_every == 0) {
      a.apply(res.x, ap);
      r = b - ap;
    }

    const double relres = r.norm() / bnorm;
    if (!std::isfinite(relres))
      throw SolverError("pcg_solve: non-finite residual at iteration " + std::to_string(it),
                        it);
    res.report.relres_trace.push_back(relres);
    res.report.iterations = it;
    if (!opts.fixed_iterations && relres <= opts.tol) {
      res.report.converged = true;
      break;
    }

    if (precond)
      precond->apply_inverse(r, z);
    else
      z = r;
    const double rz_next = r.dot(z);
    const double beta = rz_next / rz;
    rz = rz_next;
    p = z + beta * p;
  }

  if (opts.fixed_iterations)
    res.report.converged = res.report.final_relres() <= opts.tol;

  res.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace pmvb
