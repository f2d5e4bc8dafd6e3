#include "pmvb/circulant.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pmvb/errors.hpp"
#include "pmvb/model.hpp"

namespace pmvb {

namespace {

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// Half-spectrum squared magnitude of the symbol of circular convolution
// with `kernel` (center tap at offset (0,0)).
Vec kernel_power_spectrum(const Fft2& fft, const Kernel& kernel, GridDims dims) {
  Vec embedded = Vec::Zero(dims.size());
  const int ch = kernel.center_row(), cw = kernel.center_col();
  for (int di = -ch; di <= ch; ++di)
    for (int dj = -cw; dj <= cw; ++dj)
      embedded[Index(wrap(di, dims.height)) * dims.width + wrap(dj, dims.width)] +=
          kernel.at_offset(di, dj);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  fft.forward(embedded.data(), spec.data());
  Vec power(fft.spectrum_size());
  for (Index i = 0; i < power.size(); ++i) power[i] = std::norm(spec[i]);
  return power;
}

}  // namespace

CirculantPreconditioner::CirculantPreconditioner(const Kernel& kernel, GridDims dims,
                                                 double sigma2, double gamma_bar_inv)
    : dims_(dims), gamma_bar_inv_(gamma_bar_inv), fft_(dims.height, dims.width) {
  if (sigma2 <= 0.0) throw DomainError("CirculantPreconditioner: sigma2 must be positive");
  if (gamma_bar_inv < 0.0)
    throw DomainError("CirculantPreconditioner: gamma_bar_inv must be nonnegative");

  eigenvalues_ = kernel_power_spectrum(fft_, kernel, dims) / sigma2;

  // first-difference symbols: |e^{2 pi i f/w} - 1|^2 = 2 - 2 cos(2 pi f / w)
  const int sc = fft_.spectrum_cols();
  for (int fi = 0; fi < dims.height; ++fi) {
    const double gy = 2.0 - 2.0 * std::cos(2.0 * M_PI * fi / dims.height);
    for (int fj = 0; fj < sc; ++fj) {
      const double gx = 2.0 - 2.0 * std::cos(2.0 * M_PI * fj / dims.width);
      eigenvalues_[Index(fi) * sc + fj] += gamma_bar_inv * (gx + gy);
    }
  }

  double logdet = 0.0;
  for (int fi = 0; fi < dims.height; ++fi) {
    for (int fj = 0; fj < sc; ++fj) {
      const double lambda = eigenvalues_[Index(fi) * sc + fj];
      if (lambda <= 1e-15)
        throw DomainError("CirculantPreconditioner: eigenvalue " + std::to_string(lambda) +
                          " at frequency (" + std::to_string(fi) + "," + std::to_string(fj) +
                          ") makes P numerically indefinite");
      // columns 0 and (for even width) w/2 hold their own mirrors
      const bool self_mirrored = (fj == 0) || (2 * fj == dims.width);
      logdet += (self_mirrored ? 1.0 : 2.0) * std::log(lambda);
    }
  }
  log_det_ = logdet;
}

void CirculantPreconditioner::apply_inverse(ConstVecRef r, VecRef z) const {
  if (r.size() != dims_.size() || z.size() != dims_.size())
    throw DimensionError("CirculantPreconditioner::apply_inverse: size");
  std::vector<std::complex<double>> spec(fft_.spectrum_size());
  fft_.forward(r.data(), spec.data());
  for (Index i = 0; i < fft_.spectrum_size(); ++i) spec[i] /= eigenvalues_[i];
  fft_.inverse(spec.data(), z.data());
}

void CirculantPreconditioner::apply(ConstVecRef x, VecRef y) const {
  if (x.size() != dims_.size() || y.size() != dims_.size())
    throw DimensionError("CirculantPreconditioner::apply: size");
  std::vector<std::complex<double>> spec(fft_.spectrum_size());
  fft_.forward(x.data(), spec.data());
  for (Index i = 0; i < fft_.spectrum_size(); ++i) spec[i] *= eigenvalues_[i];
  fft_.inverse(spec.data(), y.data());
}

std::shared_ptr<const CirculantPreconditioner> circulant_preconditioner(
    const SparseLinearModel& model, ConstVecRef gamma) {
  if (!model.stationary)
    throw DomainError("circulant_preconditioner: model lacks stationary structure");
  if (gamma.size() != model.k())
    throw DimensionError("circulant_preconditioner: gamma length != K");
  if ((gamma.array() <= 0.0).any())
    throw DomainError("circulant_preconditioner: gamma must be strictly positive");
  const double gamma_bar_inv = gamma.cwiseInverse().mean();
  return std::make_shared<const CirculantPreconditioner>(
      model.stationary->kernel, model.stationary->dims, model.sigma2, gamma_bar_inv);
}

}  // namespace pmvb
