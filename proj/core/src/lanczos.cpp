#include "pmvb/lanczos.hpp"

#include <cmath>

#include "pmvb/errors.hpp"
#include "pmvb/rng.hpp"

namespace pmvb {

LanczosResult lanczos_variance(const LinearOperator& a, const LinearOperator& g,
                               int n_iter, std::uint64_t seed) {
  if (a.in_dim() != a.out_dim()) throw DimensionError("lanczos_variance: A not square");
  if (g.in_dim() != a.in_dim()) throw DimensionError("lanczos_variance: G in_dim != dim(A)");
  const Index n = a.in_dim();
  if (n_iter < 1) throw DomainError("lanczos_variance: n_iter must be >= 1");
  if (n_iter > n) n_iter = static_cast<int>(n);

  LanczosResult res;

  NormalStream stream(seed, 0);
  Mat v(n, n_iter);
  Vec alphas(n_iter), betas(n_iter);

  Vec q = stream.draw(n);
  q.normalize();
  v.col(0) = q;

  Vec w(n);
  int j = 0;
  for (; j < n_iter; ++j) {
    a.apply(v.col(j), w);
    const double alpha = v.col(j).dot(w);
    alphas[j] = alpha;
    w -= alpha * v.col(j);
    if (j > 0) w -= betas[j - 1] * v.col(j - 1);

    // full reorthogonalization, twice for stability
    for (int pass = 0; pass < 2; ++pass)
      w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);

    const double beta = w.norm();
    if (j + 1 < n_iter) {
      if (beta < 1e-13) {
        res.breakdown = true;
        ++j;
        break;
      }
      betas[j] = beta;
      v.col(j + 1) = w / beta;
    } else {
      ++j;
      break;
    }
  }
  res.iterations = j;

  // T_j = L L^T, W = V L^{-T}; then V T^{-1} V^T = W W^T and
  // z_k = || (G W)_k ||^2.
  Mat t = Mat::Zero(j, j);
  for (int i = 0; i < j; ++i) {
    t(i, i) = alphas[i];
    if (i + 1 < j) {
      t(i + 1, i) = betas[i];
      t(i, i + 1) = betas[i];
    }
  }
  Eigen::LLT<Mat> llt(t);
  if (llt.info() != Eigen::Success)
    throw SolverError("lanczos_variance: tridiagonal factorization failed (A not SPD?)", j);
  // W = V L^{-T}  <=>  W L^T = V
  Mat w_mat = llt.matrixL().transpose().template solve<Eigen::OnTheRight>(v.leftCols(j));

  Vec gw(g.out_dim());
  res.z = Vec::Zero(g.out_dim());
  for (int c = 0; c < j; ++c) {
    g.apply(w_mat.col(c), gw);
    res.z.array() += gw.array().square();
  }
  return res;
}

}  // namespace pmvb
