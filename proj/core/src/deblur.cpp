#include "pmvb/deblur.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmvb/conv2.hpp"
#include "pmvb/fft2.hpp"
#include "pmvb/finite_difference.hpp"
#include "pmvb/rng.hpp"

namespace pmvb {

DeblurProblem DeblurProblem::make(ImagePlane observed, Kernel kernel, double tau,
                                  double sigma2, double lambda1) {
  DeblurProblem p;
  p.extended = {observed.height + kernel.height - 1, observed.width + kernel.width - 1};
  p.score_crop = {0, 0, observed.height, observed.width};
  p.observed = std::move(observed);
  p.kernel = std::move(kernel);
  p.tau = tau;
  p.sigma2 = sigma2;
  p.lambda1 = lambda1;
  p.validate();
  return p;
}

void DeblurProblem::validate() const {
  if (extended.height < observed.height + kernel.height - 1 ||
      extended.width < observed.width + kernel.width - 1)
    throw DimensionError("DeblurProblem: extended domain too small");
  if (score_crop.row0 < 0 || score_crop.col0 < 0 ||
      score_crop.row0 + score_crop.height > observed.height ||
      score_crop.col0 + score_crop.width > observed.width)
    throw DimensionError("DeblurProblem: score crop outside observed image");
  if (tau <= 0.0 || sigma2 <= 0.0) throw DomainError("DeblurProblem: tau, sigma2 > 0");
}

SparseLinearModel build_tv_model(const DeblurProblem& problem) {
  problem.validate();
  SparseLinearModel model;
  auto conv = conv2_operator(problem.kernel, problem.extended);
  auto crop = std::make_shared<const CropOperator>(
      problem.extended, problem.pad_row0(), problem.pad_col0(), problem.observed.dims());
  model.h = std::make_shared<const ComposedOperator>(crop, conv);
  model.g = finite_difference_operator(problem.extended);
  model.sigma2 = problem.sigma2;
  model.potentials =
      Potentials::shared(SuperGaussianPotential::laplacian(problem.tau), model.g->out_dim());
  model.y = problem.observed.values;
  model.stationary = StationaryStructure{problem.kernel, problem.extended};
  return model;
}

namespace {

ImagePlane crop_to_observed(const DeblurProblem& problem, ConstVecRef x_ext) {
  ImagePlane out(problem.observed.height, problem.observed.width);
  const int r0 = problem.pad_row0(), c0 = problem.pad_col0();
  for (int i = 0; i < out.height; ++i)
    out.values.segment(Index(i) * out.width, out.width) =
        x_ext.segment(Index(i + r0) * problem.extended.width + c0, out.width);
  return out;
}

}  // namespace

NonblindResult deblur_nonblind(const DeblurProblem& problem, const VbConfig& cfg) {
  SparseLinearModel model = build_tv_model(problem);
  VbResult vb = vb_fit(model, cfg);

  NonblindResult res;
  res.mean = crop_to_observed(problem, vb.state.xhat);

  if (vb.final_batch.n_accepted() == 0)
    throw SolverError("deblur_nonblind: no accepted samples for the stdev map", 0);
  std::vector<std::pair<Index, Index>> diag;
  diag.reserve(problem.observed.size());
  const int r0 = problem.pad_row0(), c0 = problem.pad_col0();
  for (int i = 0; i < problem.observed.height; ++i)
    for (int j = 0; j < problem.observed.width; ++j) {
      const Index p = Index(i + r0) * problem.extended.width + (c0 + j);
      diag.emplace_back(p, p);
    }
  std::vector<double> var = mc_covariance_entries(vb.final_batch, diag);
  res.stdev = ImagePlane(problem.observed.height, problem.observed.width);
  for (Index i = 0; i < res.stdev.size(); ++i) res.stdev.values[i] = std::sqrt(var[i]);

  res.state = std::move(vb.state);
  res.batch = std::move(vb.final_batch);
  return res;
}

namespace {

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// T[a,b] = sum_p m[p] w[p-a] w[p-b] over kernel offsets a, b; PSD by
// construction. One FFT correlation per offset a yields the full row.
void accumulate_masked_gram(const Fft2& fft, GridDims d, const Vec& mask, const Vec& w,
                            double weight, int kh, int kw, Mat& r_out) {
  const int ch = kh / 2, cw = kw / 2;
  const Index taps = Index(kh) * kw;
  Vec shifted(d.size()), u(d.size()), row(d.size());
  for (Index la = 0; la < taps; ++la) {
    const int da = int(la) / kw - ch;
    const int db = int(la) % kw - cw;
    // shifted[p] = w[p - a]
    for (int i = 0; i < d.height; ++i) {
      const int si = wrap(i - da, d.height);
      for (int j = 0; j < d.width; ++j)
        shifted[Index(i) * d.width + j] = w[Index(si) * d.width + wrap(j - db, d.width)];
    }
    u = mask.cwiseProduct(shifted);
    fft.correlate(u, w, row);
    for (Index lb = 0; lb < taps; ++lb) {
      const int ea = int(lb) / kw - ch;
      const int eb = int(lb) % kw - cw;
      r_out(la, lb) += weight * row[Index(wrap(ea, d.height)) * d.width + wrap(eb, d.width)];
    }
  }
}

Vec project_simplex(Vec v) {
  // Euclidean projection onto {k >= 0, sum k = 1}
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  int support = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    const double t = (cum - 1.0) / double(i + 1);
    if (sorted[i] - t > 0.0) {
      theta = t;
      support = int(i + 1);
    }
  }
  (void)support;
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace

MStepResult m_step_kernel(const SampleBatch& batch, const Vec& xhat,
                          const ImagePlane& observed, GridDims extended, int kernel_height,
                          int kernel_width, double lambda1, int max_samples,
                          const Kernel* k_init) {
  if (kernel_height % 2 == 0 || kernel_width % 2 == 0 || kernel_height <= 0 ||
      kernel_width <= 0)
    throw DimensionError("m_step_kernel: kernel dims must be odd and positive");
  if (xhat.size() != extended.size()) throw DimensionError("m_step_kernel: xhat length");
  if (lambda1 < 0.0) throw DomainError("m_step_kernel: lambda1 must be nonnegative");

  const int kh = kernel_height, kw = kernel_width;
  const Index taps = Index(kh) * kw;
  const int r0 = kh / 2, c0 = kw / 2;

  // observed-window mask and zero-padded embedding of y
  Vec mask = Vec::Zero(extended.size());
  Vec y0 = Vec::Zero(extended.size());
  for (int i = 0; i < observed.height; ++i)
    for (int j = 0; j < observed.width; ++j) {
      const Index p = Index(i + r0) * extended.width + (c0 + j);
      mask[p] = 1.0;
      y0[p] = observed.at(i, j);
    }

  Fft2 fft(extended.height, extended.width);

  Mat r_xx = Mat::Zero(taps, taps);
  accumulate_masked_gram(fft, extended, mask, xhat, 1.0, kh, kw, r_xx);
  int used = 0;
  for (int i = 0; i < batch.requested && used < max_samples; ++i) {
    if (!batch.accepted[i]) continue;
    ++used;
  }
  if (used > 0) {
    int count = 0;
    for (int i = 0; i < batch.requested && count < used; ++i) {
      if (!batch.accepted[i]) continue;
      accumulate_masked_gram(fft, extended, mask, batch.samples[i], 1.0 / used, kh, kw, r_xx);
      ++count;
    }
  }

  Vec corr(extended.size());
  fft.correlate(y0, xhat, corr);
  Vec r_xy(taps);
  for (Index la = 0; la < taps; ++la) {
    const int da = int(la) / kw - r0;
    const int db = int(la) % kw - c0;
    r_xy[la] =
        corr[Index(wrap(da, extended.height)) * extended.width + wrap(db, extended.width)];
  }

  MStepResult res;

  // symmetrize and guard against sampling-noise indefiniteness
  r_xx = 0.5 * (r_xx + r_xx.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(r_xx);
  const double lam_max = eig.eigenvalues().maxCoeff();
  const double lam_min = eig.eigenvalues().minCoeff();
  if (lam_max <= 0.0) throw SolverError("m_step_kernel: R_xx has no positive spectrum", 0);
  if (lam_min < -1e-10 * lam_max) {
    Vec floored = eig.eigenvalues().cwiseMax(1e-12 * lam_max);
    r_xx = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
    res.psd_floored = true;
  }
  const double lipschitz = std::max(lam_max, 1e-300);

  auto objective = [&](const Vec& k) {
    return 0.5 * k.dot(r_xx * k) - r_xy.dot(k) + lambda1 * k.lpNorm<1>();
  };

  Vec k_start;
  if (k_init) {
    if (k_init->height != kh || k_init->width != kw)
      throw DimensionError("m_step_kernel: k_init dims mismatch");
    k_start = k_init->taps;
  } else {
    k_start = Vec::Constant(taps, 1.0 / double(taps));
  }
  res.objective_at_init = objective(k_start);

  // phase 1: proximal gradient on { k >= 0 } with the exact L1 prox
  Vec u = k_start;
  const double eta = 1.0 / lipschitz;
  int it = 0;
  for (; it < 5000; ++it) {
    Vec grad = r_xx * u - r_xy;
    Vec next = (u - eta * grad).array() - eta * lambda1;
    next = next.cwiseMax(0.0);
    const double delta = (next - u).lpNorm<Eigen::Infinity>();
    u = std::move(next);
    if (delta <= 1e-14 * std::max(1.0, u.lpNorm<Eigen::Infinity>())) break;
  }

  // phase 2: exact quadratic minimization on the simplex restricted to the
  // recovered support (keeps the L1-selected sparsity pattern)
  std::vector<Index> support;
  for (Index i = 0; i < taps; ++i)
    if (u[i] > 0.0) support.push_back(i);
  Vec k_full = Vec::Zero(taps);
  if (support.empty()) {
    Index best;
    r_xy.maxCoeff(&best);
    k_full[best] = 1.0;  // degenerate large-lambda limit: single tap
  } else {
    const Index ns = static_cast<Index>(support.size());
    Vec ks(ns);
    const double mass = u.sum();
    for (Index i = 0; i < ns; ++i) ks[i] = mass > 0.0 ? u[support[i]] / mass : 1.0 / ns;
    ks = project_simplex(ks);
    Mat rs(ns, ns);
    Vec rys(ns);
    for (Index i = 0; i < ns; ++i) {
      rys[i] = r_xy[support[i]];
      for (Index j = 0; j < ns; ++j) rs(i, j) = r_xx(support[i], support[j]);
    }
    for (int jt = 0; jt < 5000; ++jt) {
      Vec next = project_simplex(ks - eta * (rs * ks - rys));
      const double delta = (next - ks).lpNorm<Eigen::Infinity>();
      ks = std::move(next);
      if (delta <= 1e-14) break;
      ++it;
    }
    for (Index i = 0; i < ns; ++i) k_full[support[i]] = ks[i];
  }

  // safeguard: never report an update that worsens the surrogate
  if (k_init && objective(k_full) > res.objective_at_init) k_full = k_start;

  res.iterations = it;
  res.kernel = Kernel(kh, kw, k_full);
  res.objective = objective(k_full);
  return res;
}

BlindResult em_blind_deblur(const DeblurProblem& problem, const Kernel& k0,
                            const EmConfig& cfg) {
  problem.validate();
  if (k0.height != problem.kernel.height || k0.width != problem.kernel.width)
    throw DimensionError("em_blind_deblur: k0 dims disagree with problem kernel dims");
  if (cfg.em_iters < 1) throw DomainError("em_blind_deblur: em_iters must be >= 1");

  BlindResult res;
  res.trace.initial = k0;

  DeblurProblem current = problem;
  current.kernel = k0;

  Vec xhat;
  for (int t = 1; t <= cfg.em_iters; ++t) {
    SparseLinearModel model = build_tv_model(current);
    VbConfig e_cfg = cfg.e_step;
    e_cfg.seed = derive_stream_seed(cfg.e_step.seed, 0xE0000000ULL + t);
    VbResult vb = vb_fit(model, e_cfg);
    xhat = vb.state.xhat;

    MStepResult m = m_step_kernel(vb.final_batch, xhat, current.observed, current.extended,
                                  current.kernel.height, current.kernel.width,
                                  current.lambda1, cfg.mstep_samples, &current.kernel);

    EmIterRecord rec;
    rec.kernel = m.kernel;
    rec.mstep_objective = m.objective;
    rec.mstep_objective_at_previous = m.objective_at_init;
    rec.phi_final = vb.state.phi_trace.empty() ? 0.0 : vb.state.phi_trace.back().phi;
    res.trace.iterations.push_back(rec);

    current.kernel = m.kernel;
  }

  res.kernel = current.kernel;
  res.mean = crop_to_observed(current, xhat);
  return res;
}

double psnr(const ImagePlane& x, const ImagePlane& reference, const CropWindow& crop) {
  if (crop.height <= 0 || crop.width <= 0)
    throw DimensionError("psnr: empty crop");
  if (crop.row0 < 0 || crop.col0 < 0 || crop.row0 + crop.height > x.height ||
      crop.col0 + crop.width > x.width || crop.row0 + crop.height > reference.height ||
      crop.col0 + crop.width > reference.width)
    throw DimensionError("psnr: crop outside image");

  double mse = 0.0;
  for (int i = 0; i < crop.height; ++i)
    for (int j = 0; j < crop.width; ++j) {
      const double d =
          x.at(crop.row0 + i, crop.col0 + j) - reference.at(crop.row0 + i, crop.col0 + j);
      mse += d * d;
    }
  mse /= double(crop.height) * crop.width;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace pmvb
