#include "pmvb/varbayes.hpp"

#include <cmath>

#include "pmvb/lanczos.hpp"
#include "pmvb/rng.hpp"

namespace pmvb {

namespace {

double clamp_gamma(double gamma, const VbConfig& cfg) {
  return std::min(cfg.gamma_max, std::max(cfg.gamma_min, gamma));
}

Vec initial_gamma(const SparseLinearModel& model, const VbConfig& cfg) {
  // gamma_k^{-1} = gamma_update(pot_k, 1): scale-matched at unit response,
  // uniform for shared potentials so the first preconditioner is exact.
  Vec gamma(model.k());
  for (Index k = 0; k < model.k(); ++k)
    gamma[k] = clamp_gamma(1.0 / gamma_update(model.potentials.at(k), 1.0), cfg);
  return gamma;
}

}  // namespace

SmoothedObjective::SmoothedObjective(const SparseLinearModel& model, Vec z)
    : model_(&model), z_(std::move(z)) {
  if (z_.size() != model.k()) throw DimensionError("SmoothedObjective: z length != K");
  if ((z_.array() < 0.0).any())
    throw DomainError("SmoothedObjective: z must be nonnegative");
}

double SmoothedObjective::operator()(ConstVecRef x, VecRef grad) const {
  const SparseLinearModel& m = *model_;
  Vec hx(m.m());
  m.h->apply(x, hx);
  Vec resid = hx - m.y;

  Vec s(m.k());
  m.g->apply(x, s);

  double value = resid.squaredNorm() / m.sigma2;
  Vec w(m.k());
  for (Index k = 0; k < m.k(); ++k) {
    const double v = s[k] * s[k] + z_[k];
    value -= 2.0 * log_potential(m.potentials.at(k), std::sqrt(v));
    w[k] = v > 0.0 ? gamma_update(m.potentials.at(k), v) * s[k] : 0.0;
  }

  m.h->apply_adjoint(resid, grad);
  grad *= 2.0 / m.sigma2;
  Vec gtw(m.n());
  m.g->apply_adjoint(w, gtw);
  grad += gtw;
  return value;
}

double SmoothedObjective::value(ConstVecRef x) const {
  const SparseLinearModel& m = *model_;
  Vec hx(m.m());
  m.h->apply(x, hx);
  double value = (hx - m.y).squaredNorm() / m.sigma2;
  Vec s(m.k());
  m.g->apply(x, s);
  for (Index k = 0; k < m.k(); ++k)
    value -= 2.0 * log_potential(m.potentials.at(k), std::sqrt(s[k] * s[k] + z_[k]));
  return value;
}

InnerLoopResult inner_loop(const SparseLinearModel& model, ConstVecRef z, const Vec& x0,
                           const VbConfig& cfg) {
  SmoothedObjective obj(model, z);
  LbfgsOptions opts;
  opts.grad_tol = cfg.inner_grad_tol;
  opts.max_iter = cfg.inner_max_iters;
  opts.memory = cfg.lbfgs_memory;

  InnerLoopResult res;
  res.opt = lbfgs_minimize([&obj](ConstVecRef x, VecRef g) { return obj(x, g); }, x0, opts);
  res.xhat = res.opt.x;

  Vec s(model.k());
  model.g->apply(res.xhat, s);
  res.gamma.resize(model.k());
  for (Index k = 0; k < model.k(); ++k) {
    const double v = s[k] * s[k] + z[k];
    res.gamma[k] = clamp_gamma(1.0 / gamma_update(model.potentials.at(k), v), cfg);
  }
  return res;
}

OuterUpdate outer_loop_update(const GmrfSystem& sys, const VbConfig& cfg,
                              const Preconditioner* precond, std::uint64_t batch_seed) {
  OuterUpdate out;
  switch (cfg.variance_mode) {
    case VarianceMode::MonteCarlo: {
      SamplerConfig scfg;
      scfg.pcg = cfg.sample_pcg;
      scfg.precond = precond;
      scfg.master_seed = batch_seed;
      scfg.jobs = cfg.jobs;
      McVariances mv = mc_variances(sys, cfg.n_samples, scfg);
      out.z = clip_variances(mv.z_hat, sys.gamma());
      out.batch = std::move(mv.batch);
      break;
    }
    case VarianceMode::Lanczos: {
      GmrfSystemOperator a(sys);
      out.z = lanczos_variance(a, *sys.model().g, cfg.lanczos_iters, batch_seed).z;
      break;
    }
    case VarianceMode::ExactDense:
      out.z = exact_variances_dense(sys, cfg.dense_guard);
      break;
  }
  return out;
}

FreeEnergyTerms free_energy_terms(const GmrfSystem& sys, ConstVecRef xhat,
                                  double log_det_value) {
  const SparseLinearModel& m = sys.model();
  FreeEnergyTerms t;
  t.log_det = log_det_value;
  for (Index k = 0; k < m.k(); ++k) t.h += h_dual(m.potentials.at(k), sys.gamma()[k]);

  Vec hx(m.m());
  m.h->apply(xhat, hx);
  Vec s(m.k());
  m.g->apply(xhat, s);
  t.r = (hx - m.y).squaredNorm() / m.sigma2 +
        s.cwiseProduct(sys.gamma_inv()).dot(s);
  t.phi = t.log_det + t.h + t.r;
  return t;
}

double free_energy(const VariationalState& state, const GmrfSystem& sys,
                   const SpdReference& reference, const SampleBatch& batch) {
  const double logdet = mc_logdet(batch, sys, reference).value;
  return free_energy_terms(sys, state.xhat, logdet).phi;
}

VbResult vb_fit(const SparseLinearModel& model, const VbConfig& cfg) {
  model.validate();
  if (cfg.outer_iters < 1) throw DomainError("vb_fit: outer_iters must be >= 1");

  VbResult res;
  VariationalState& st = res.state;
  st.gamma = initial_gamma(model, cfg);
  st.xhat = model.h->apply_adjoint(model.y);

  const bool exact_mode = cfg.variance_mode == VarianceMode::ExactDense;

  auto build_precond = [&](ConstVecRef gamma) -> std::shared_ptr<const CirculantPreconditioner> {
    if (!cfg.use_preconditioner || !model.stationary) return nullptr;
    return circulant_preconditioner(model, gamma);
  };

  auto push_phi = [&](int outer_iter, const GmrfSystem& sys, ConstVecRef xhat,
                      double logdet) {
    FreeEnergyTerms t = free_energy_terms(sys, xhat, logdet);
    st.phi_trace.push_back({outer_iter, t.log_det, t.h, t.r, t.phi});
  };

  for (int t = 1; t <= cfg.outer_iters; ++t) {
    GmrfSystem sys = assemble_system(model, st.gamma);
    auto precond = build_precond(st.gamma);

    std::uint64_t batch_seed = derive_stream_seed(cfg.seed, 0x0B000000ULL + t);
    OuterUpdate upd = outer_loop_update(sys, cfg, precond.get(), batch_seed);

    // free energy of the gamma entering this iteration: the batch just drawn
    // lives at that gamma, so the Monte-Carlo log-det applies to it
    if (cfg.track_free_energy && !exact_mode && t >= 2 && precond) {
      if (upd.batch.requested == 0) {
        SamplerConfig scfg;
        scfg.pcg = cfg.sample_pcg;
        scfg.precond = precond.get();
        scfg.master_seed = derive_stream_seed(cfg.seed, 0x0F000000ULL + t);
        scfg.jobs = cfg.jobs;
        upd.batch = mc_variances(sys, cfg.n_samples, scfg).batch;
      }
      push_phi(t - 1, sys, st.xhat, mc_logdet(upd.batch, sys, *precond).value);
    }

    st.z = upd.z.cwiseMax(cfg.z_floor);
    InnerLoopResult inner = inner_loop(model, st.z, st.xhat, cfg);
    if (inner.opt.line_search_failed) st.optimizer_warning = true;
    st.xhat = inner.xhat;
    st.gamma = inner.gamma;
    st.outer_completed = t;

    if (exact_mode && cfg.track_free_energy) {
      GmrfSystem sys_new = assemble_system(model, st.gamma);
      push_phi(t, sys_new, st.xhat, exact_logdet_dense(sys_new, cfg.dense_guard));
      const size_t m = st.phi_trace.size();
      if (m >= 2) {
        const double prev = st.phi_trace[m - 2].phi, cur = st.phi_trace[m - 1].phi;
        if (cur > prev + 0.1 * std::abs(prev)) {
          st.aborted = true;
          st.note = "free energy increased by more than 10% between exact-mode iterations";
          return res;
        }
      }
    }
  }

  // final batch at the converged gamma (also the source of the posterior
  // stdev map downstream)
  {
    GmrfSystem sys = assemble_system(model, st.gamma);
    auto precond = build_precond(st.gamma);
    SamplerConfig scfg;
    scfg.pcg = cfg.sample_pcg;
    scfg.precond = precond.get();
    scfg.master_seed = derive_stream_seed(cfg.seed, 0xF1A1ULL);
    scfg.jobs = cfg.jobs;
    res.final_batch = mc_variances(sys, cfg.n_samples, scfg).batch;

    if (cfg.track_free_energy && !exact_mode && precond)
      push_phi(cfg.outer_iters, sys, st.xhat, mc_logdet(res.final_batch, sys, *precond).value);
  }
  return res;
}

LbfgsResult map_estimate(const SparseLinearModel& model, const VbConfig& cfg) {
  model.validate();
  Vec z = Vec::Constant(model.k(), 1e-10);
  SmoothedObjective obj(model, z);
  LbfgsOptions opts;
  opts.grad_tol = cfg.inner_grad_tol;
  opts.max_iter = cfg.inner_max_iters;
  opts.memory = cfg.lbfgs_memory;
  Vec x0 = model.h->apply_adjoint(model.y);
  return lbfgs_minimize([&obj](ConstVecRef x, VecRef g) { return obj(x, g); }, x0, opts);
}

}  // namespace pmvb
