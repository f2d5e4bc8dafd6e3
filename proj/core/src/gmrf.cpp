#include "pmvb/gmrf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmvb/parallel.hpp"
#include "pmvb/rng.hpp"

namespace pmvb {

GmrfSystem::GmrfSystem(const SparseLinearModel& model, Vec gamma, Vec beta)
    : model_(&model), gamma_(std::move(gamma)), beta_(std::move(beta)) {
  model.validate();
  if (gamma_.size() != model.k()) throw DimensionError("GmrfSystem: gamma length != K");
  if ((gamma_.array() <= 0.0).any())
    throw DomainError("GmrfSystem: gamma must be strictly positive");
  if (beta_.size() == 0) beta_ = Vec::Zero(model.k());
  if (beta_.size() != model.k()) throw DimensionError("GmrfSystem: beta length != K");

  gamma_inv_ = gamma_.cwiseInverse();

  b_ = model.h->apply_adjoint(model.y) / model.sigma2;
  if (!beta_.isZero(0.0)) b_ += model.g->apply_adjoint(beta_);
}

void GmrfSystem::apply_a(ConstVecRef x, VecRef y) const {
  Vec hx(model_->m());
  model_->h->apply(x, hx);
  model_->h->apply_adjoint(hx, y);
  y /= model_->sigma2;

  Vec gx(model_->k());
  model_->g->apply(x, gx);
  gx.array() *= gamma_inv_.array();
  Vec gtg(model_->n());
  model_->g->apply_adjoint(gx, gtg);
  y += gtg;
}

GmrfSystem assemble_system(const SparseLinearModel& model, Vec gamma, Vec beta) {
  return GmrfSystem(model, std::move(gamma), std::move(beta));
}

PcgResult posterior_mean(const GmrfSystem& sys, const Preconditioner* precond,
                         const PcgOptions& opts) {
  GmrfSystemOperator a(sys);
  return pcg_solve(a, sys.b(), precond, opts);
}

SampleDraw perturb_and_map_sample(const GmrfSystem& sys, std::uint64_t master_seed,
                                  std::uint64_t index, const Preconditioner* precond,
                                  const PcgOptions& opts) {
  const SparseLinearModel& model = sys.model();
  NormalStream stream(master_seed, index);

  const double sigma = std::sqrt(model.sigma2);
  Vec y_tilde = sigma * stream.draw(model.m());
  Vec beta_tilde = stream.draw(model.k()).cwiseProduct(sys.gamma_inv().cwiseSqrt());

  Vec rhs = model.h->apply_adjoint(y_tilde) / model.sigma2;
  rhs += model.g->apply_adjoint(beta_tilde);

  SampleDraw draw;
  GmrfSystemOperator a(sys);
  try {
    PcgResult r = pcg_solve(a, rhs, precond, opts);
    draw.x = std::move(r.x);
    draw.report = std::move(r.report);
  } catch (const SolverError& e) {
    draw.accepted = false;
    draw.report.iterations = e.iteration();
    draw.report.converged = false;
  }
  return draw;
}

int SampleBatch::n_accepted() const {
  return static_cast<int>(std::count(accepted.begin(), accepted.end(), std::uint8_t{1}));
}

McVariances mc_variances(const GmrfSystem& sys, int n_samples, const SamplerConfig& cfg) {
  if (n_samples < 2) throw DomainError("mc_variances: need at least 2 samples");

  McVariances out;
  out.batch.master_seed = cfg.master_seed;
  out.batch.requested = n_samples;
  out.batch.samples.resize(n_samples);
  out.batch.reports.resize(n_samples);
  out.batch.accepted.assign(n_samples, 0);

  parallel_for(n_samples, cfg.jobs, [&](int i) {
    SampleDraw draw = perturb_and_map_sample(sys, cfg.master_seed, i, cfg.precond, cfg.pcg);
    out.batch.reports[i] = std::move(draw.report);
    if (draw.accepted) {
      out.batch.samples[i] = std::move(draw.x);
      out.batch.accepted[i] = 1;
    }
  });

  // fixed-order reduction: sum over samples in index order
  const int n_acc = out.batch.n_accepted();
  if (n_acc == 0) throw SolverError("mc_variances: every sample draw diverged", 0);
  out.z_hat = Vec::Zero(sys.k());
  Vec s(sys.k());
  for (int i = 0; i < n_samples; ++i) {
    if (!out.batch.accepted[i]) continue;
    sys.model().g->apply(out.batch.samples[i], s);
    out.z_hat.array() += s.array().square();
  }
  out.z_hat /= double(n_acc);
  return out;
}

Vec clip_variances(ConstVecRef z_hat, ConstVecRef gamma) {
  if (z_hat.size() != gamma.size()) throw DimensionError("clip_variances: length mismatch");
  if ((gamma.array() <= 0.0).any())
    throw DomainError("clip_variances: gamma must be strictly positive");
  return z_hat.cwiseMin(gamma.cwiseInverse());
}

std::vector<double> mc_covariance_entries(const SampleBatch& batch,
                                          const std::vector<std::pair<Index, Index>>& pairs) {
  const int n_acc = batch.n_accepted();
  if (n_acc == 0) throw DomainError("mc_covariance_entries: empty batch");

  Index dim = 0;
  for (int i = 0; i < batch.requested; ++i)
    if (batch.accepted[i]) {
      dim = batch.samples[i].size();
      break;
    }
  for (const auto& [a, b] : pairs)
    if (a < 0 || b < 0 || a >= dim || b >= dim)
      throw DimensionError("mc_covariance_entries: index out of range");

  std::vector<double> out(pairs.size(), 0.0);
  for (int i = 0; i < batch.requested; ++i) {
    if (!batch.accepted[i]) continue;
    const Vec& x = batch.samples[i];
    for (size_t p = 0; p < pairs.size(); ++p) out[p] += x[pairs[p].first] * x[pairs[p].second];
  }
  for (double& v : out) v /= double(n_acc);
  return out;
}

LogDetEstimate mc_logdet(const SampleBatch& batch, const GmrfSystem& sys,
                         const SpdReference& reference) {
  const int n_acc = batch.n_accepted();
  if (n_acc == 0) throw DomainError("mc_logdet: empty batch");

  std::vector<double> exponents;
  exponents.reserve(n_acc);
  Vec ax(sys.n()), px(sys.n());
  for (int i = 0; i < batch.requested; ++i) {
    if (!batch.accepted[i]) continue;
    const Vec& x = batch.samples[i];
    sys.apply_a(x, ax);
    reference.apply(x, px);
    exponents.push_back(0.5 * (x.dot(ax) - x.dot(px)));
  }

  const double m = *std::max_element(exponents.begin(), exponents.end());
  const double lo = *std::min_element(exponents.begin(), exponents.end());
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - m);
  const double lse = m + std::log(sum);

  LogDetEstimate est;
  est.value = reference.log_det() + 2.0 * (lse - std::log(double(n_acc)));
  est.exponent_spread = m - lo;
  est.high_variance = est.exponent_spread > 20.0;
  return est;
}

Vec exact_variances_dense(const GmrfSystem& sys, Index max_n) {
  const Index n = sys.n();
  if (n > max_n)
    throw SizeGuardError("exact_variances_dense: N = " + std::to_string(n) +
                         " exceeds guard " + std::to_string(max_n));

  Mat a(n, n);
  {
    Vec e = Vec::Zero(n);
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      sys.apply_a(e, a.col(j));
      e[j] = 0.0;
    }
  }
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw SolverError("exact_variances_dense: Cholesky failed; A not SPD", 0);
  Mat a_inv = llt.solve(Mat::Identity(n, n));

  // z = sum_n (G a_inv e_n) o (G e_n), elementwise over rows of G
  const LinearOperator& g = *sys.model().g;
  Vec z = Vec::Zero(sys.k());
  Vec g_col(sys.k()), g_inv_col(sys.k());
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    g.apply(e, g_col);
    g.apply(a_inv.col(j), g_inv_col);
    z.array() += g_col.array() * g_inv_col.array();
    e[j] = 0.0;
  }
  return z;
}

double exact_logdet_dense(const GmrfSystem& sys, Index max_n) {
  const Index n = sys.n();
  if (n > max_n)
    throw SizeGuardError("exact_logdet_dense: N = " + std::to_string(n) +
                         " exceeds guard " + std::to_string(max_n));
  Mat a(n, n);
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    sys.apply_a(e, a.col(j));
    e[j] = 0.0;
  }
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw SolverError("exact_logdet_dense: Cholesky failed; A not SPD", 0);
  return 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace pmvb
