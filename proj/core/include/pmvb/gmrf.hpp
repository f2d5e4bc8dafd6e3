#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pmvb/circulant.hpp"
#include "pmvb/model.hpp"
#include "pmvb/pcg.hpp"

namespace pmvb {

/// Implicit Gaussian system at fixed variational parameters (gamma, beta):
///   A = sigma^{-2} H^T H + G^T Gamma^{-1} G,   b = sigma^{-2} H^T y + G^T beta.
/// A is applied matrix-free and is SPD whenever null(H) and null(G) intersect
/// trivially. The posterior mean is A^{-1} b.
class GmrfSystem {
 public:
  GmrfSystem(const SparseLinearModel& model, Vec gamma, Vec beta);

  const SparseLinearModel& model() const { return *model_; }
  const Vec& gamma() const { return gamma_; }
  const Vec& gamma_inv() const { return gamma_inv_; }
  const Vec& beta() const { return beta_; }
  const Vec& b() const { return b_; }

  Index n() const { return model_->n(); }
  Index k() const { return model_->k(); }

  /// y = A x. Thread-safe; workspace is per-call.
  void apply_a(ConstVecRef x, VecRef y) const;

 private:
  const SparseLinearModel* model_;
  Vec gamma_, gamma_inv_, beta_, b_;
};

/// LinearOperator view over a system's A; holds a pointer, caller keeps the
/// system alive.
class GmrfSystemOperator final : public LinearOperator {
 public:
  explicit GmrfSystemOperator(const GmrfSystem& sys)
      : LinearOperator(sys.n(), sys.n()), sys_(&sys) {}

 private:
  void do_apply(ConstVecRef x, VecRef y) const override { sys_->apply_a(x, y); }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override { sys_->apply_a(y, x); }
  const GmrfSystem* sys_;
};

GmrfSystem assemble_system(const SparseLinearModel& model, Vec gamma, Vec beta = Vec());

PcgResult posterior_mean(const GmrfSystem& sys, const Preconditioner* precond,
                         const PcgOptions& opts);

struct SampleDraw {
  Vec x;  // zero-mean sample from N(0, A^{-1}), up to solver tolerance
  SolveReport report;
  bool accepted = true;
};

/// One Perturb-and-MAP draw: perturb each Gaussian factor independently
/// (y_tilde ~ N(0, sigma^2 I), beta_tilde ~ N(0, Gamma^{-1}), elementwise
/// since Gamma is diagonal) and solve A x = sigma^{-2} H^T y_tilde +
/// G^T beta_tilde by PCG. Sample index i uses the stream derived from
/// (master_seed, i), so batches are reproducible under any schedule.
SampleDraw perturb_and_map_sample(const GmrfSystem& sys, std::uint64_t master_seed,
                                  std::uint64_t index, const Preconditioner* precond,
                                  const PcgOptions& opts);

struct SampleBatch {
  std::vector<Vec> samples;            // indexed by draw; rejected slots empty
  std::vector<SolveReport> reports;
  std::vector<std::uint8_t> accepted;
  std::uint64_t master_seed = 0;
  int requested = 0;

  int n_accepted() const;
  bool flagged() const { return n_accepted() != requested; }
};

struct SamplerConfig {
  /// Paper budget: 20 PCG iterations per sample with circulant
  /// preconditioning. Set fixed_iterations = false for tolerance mode.
  PcgOptions pcg{.tol = 1e-10, .max_iter = 20, .fixed_iterations = true};
  const Preconditioner* precond = nullptr;
  std::uint64_t master_seed = 0;
  int jobs = 0;  // <= 0: hardware concurrency
};

struct McVariances {
  Vec z_hat;  // z_hat_k = (1/N_s) sum_i (g_k^T x_i)^2, over accepted samples
  SampleBatch batch;
};

/// Draws n_samples independent samples (concurrently) and forms the
/// unbiased variance estimator; marginally z_hat_k ~ (z_k / N_s) chi2(N_s).
/// Rejected draws are dropped and the denominator adjusted. The reduction
/// runs in fixed index order, so results are bitwise reproducible
/// regardless of the number of jobs.
McVariances mc_variances(const GmrfSystem& sys, int n_samples, const SamplerConfig& cfg);

/// z_bar_k = min(z_hat_k, 1/gamma_k); exact variances satisfy z_k <= 1/gamma_k,
/// so clipping never moves an estimate past the truth from above.
Vec clip_variances(ConstVecRef z_hat, ConstVecRef gamma);

/// Covariance entries for requested index pairs only (never densifies):
/// Sigma_hat(i, j) = (1/N_s) sum x[i] x[j].
std::vector<double> mc_covariance_entries(const SampleBatch& batch,
                                          const std::vector<std::pair<Index, Index>>& pairs);

struct LogDetEstimate {
  double value = 0.0;
  double exponent_spread = 0.0;  // max - min of the per-sample exponents, nats
  bool high_variance = false;    // spread exceeded 20 nats; choose P closer to A
};

/// Monte-Carlo log-determinant from the Gaussian identity
///   E[exp(0.5 x^T (A - P) x)] = (|A|/|P|)^{1/2},  x ~ N(0, A^{-1}),
/// giving  log|A| ~= log|P| + 2 (logsumexp_i(0.5 q_i) - log N_s)
/// with q_i = x_i^T (A - P) x_i, computed with a stable log-sum-exp.
/// Exact (zero variance) when P = A.
LogDetEstimate mc_logdet(const SampleBatch& batch, const GmrfSystem& sys,
                         const SpdReference& reference);

/// Dense oracle: z = diag(G A^{-1} G^T), the marginal variances of s = Gx.
/// Also the gradient of log|A| in gamma^{-1}. Desk scale only.
Vec exact_variances_dense(const GmrfSystem& sys, Index max_n = 2000);

/// Dense Cholesky log|A|. Desk scale only.
double exact_logdet_dense(const GmrfSystem& sys, Index max_n = 2000);

}  // namespace pmvb
