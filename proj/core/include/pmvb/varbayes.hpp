#pragma once

#include <string>

#include "pmvb/gmrf.hpp"
#include "pmvb/lbfgs.hpp"

namespace pmvb {

enum class VarianceMode { MonteCarlo, Lanczos, ExactDense };

struct VbConfig {
  int outer_iters = 6;
  int n_samples = 20;
  VarianceMode variance_mode = VarianceMode::MonteCarlo;
  int lanczos_iters = 400;  // matvec parity with n_samples x 20 PCG iterations

  double inner_grad_tol = 1e-5;
  int inner_max_iters = 500;
  int lbfgs_memory = 10;

  PcgOptions sample_pcg{.tol = 1e-10, .max_iter = 20, .fixed_iterations = true};
  PcgOptions mean_pcg{.tol = 1e-8, .max_iter = 500};

  std::uint64_t seed = 0;
  int jobs = 0;

  double gamma_min = 1e-8;  // clamp window keeps Gamma nonsingular
  double gamma_max = 1e8;
  double z_floor = 1e-10;   // keeps the smoothed objective differentiable at s = 0

  Index dense_guard = 2000;
  bool use_preconditioner = true;  // requires model.stationary
  bool track_free_energy = true;
};

struct PhiTerms {
  int outer_iter = 0;
  double log_det = 0.0;
  double h = 0.0;
  double r = 0.0;
  double phi = 0.0;
};

struct VariationalState {
  Vec gamma;
  Vec z;
  Vec xhat;
  std::vector<PhiTerms> phi_trace;
  int outer_completed = 0;
  bool aborted = false;
  bool optimizer_warning = false;
  std::string note;
};

struct VbResult {
  VariationalState state;
  SampleBatch final_batch;  // drawn at the final gamma
};

/// Smoothed MAP objective
///   phi(x; z) = sigma^{-2} ||y - Hx||^2 - 2 sum_k log t_k(sqrt(s_k^2 + z_k)),
/// s = Gx. At z = 0 this is exactly the MAP objective; z > 0 smooths the
/// kink at s_k = 0. The gradient is 2 sigma^{-2} H^T(Hx - y) + G^T w with
/// w_k = gamma_update(v_k) * s_k, v_k = s_k^2 + z_k.
class SmoothedObjective {
 public:
  SmoothedObjective(const SparseLinearModel& model, Vec z);

  double operator()(ConstVecRef x, VecRef grad) const;
  double value(ConstVecRef x) const;

 private:
  const SparseLinearModel* model_;
  Vec z_;
};

struct InnerLoopResult {
  Vec xhat;
  Vec gamma;  // recovered by gamma_update at v = s_hat^2 + z, clamped
  LbfgsResult opt;
};

/// Minimizes the smoothed objective from x0, then recovers the variational
/// parameters gamma_k^{-1} = -2 d log t_k(sqrt(v))/dv at v = s_hat_k^2 + z_k.
InnerLoopResult inner_loop(const SparseLinearModel& model, ConstVecRef z, const Vec& x0,
                           const VbConfig& cfg);

struct OuterUpdate {
  Vec z;              // clipped (MC), raw (Lanczos), or exact variances
  SampleBatch batch;  // non-empty in MonteCarlo mode
};

/// Outer-loop variance refresh at the system's current gamma.
OuterUpdate outer_loop_update(const GmrfSystem& sys, const VbConfig& cfg,
                              const Preconditioner* precond, std::uint64_t batch_seed);

struct FreeEnergyTerms {
  double log_det = 0.0;
  double h = 0.0;  // sum_k h_k(gamma_k)
  double r = 0.0;  // sigma^{-2} ||y - H x||^2 + s^T Gamma^{-1} s
  double phi = 0.0;
};

/// phi_Q = log|A| + h(gamma) + R(xhat, gamma) with the log-det supplied by
/// the caller (Monte-Carlo estimate or dense).
FreeEnergyTerms free_energy_terms(const GmrfSystem& sys, ConstVecRef xhat,
                                  double log_det_value);

/// Monte-Carlo free energy from a batch drawn at the system's gamma.
double free_energy(const VariationalState& state, const GmrfSystem& sys,
                   const SpdReference& reference, const SampleBatch& batch);

/// The double loop: alternate outer variance refresh and inner smoothed MAP
/// minimization with gamma recovery, tracking phi_Q per outer iteration.
/// Globally convergent (monotone phi trace) for log-concave potentials when
/// variances are exact.
VbResult vb_fit(const SparseLinearModel& model, const VbConfig& cfg);

/// Plain MAP point estimate: the smoothed objective with z fixed to a tiny
/// floor (1e-10) for differentiability.
LbfgsResult map_estimate(const SparseLinearModel& model, const VbConfig& cfg);

}  // namespace pmvb
