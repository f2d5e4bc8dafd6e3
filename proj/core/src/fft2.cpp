#include "pmvb/fft2.hpp"

#include <fftw3.h>

#include <mutex>

#include "pmvb/errors.hpp"

namespace pmvb {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2::Fft2(int height, int width) : h_(height), w_(width) {
  if (height <= 0 || width <= 0) throw DimensionError("Fft2: non-positive dims");
  std::vector<double> real(Index(h_) * w_);
  std::vector<std::complex<double>> cplx(spectrum_size());
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_plan_ = fftw_plan_dft_r2c_2d(h_, w_, real.data(),
                                   reinterpret_cast<fftw_complex*>(cplx.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  inv_plan_ = fftw_plan_dft_c2r_2d(h_, w_, reinterpret_cast<fftw_complex*>(cplx.data()),
                                   real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fwd_plan_ || !inv_plan_) throw Error("Fft2: FFTW plan creation failed");
}

Fft2::~Fft2() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_plan_));
}

void Fft2::forward(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Fft2::inverse(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_plan_),
                       reinterpret_cast<fftw_complex*>(in), out);
  const double scale = 1.0 / (double(h_) * w_);
  const Index n = Index(h_) * w_;
  for (Index i = 0; i < n; ++i) out[i] *= scale;
}

void Fft2::correlate(const Vec& u, const Vec& v, Vec& out) const {
  const Index n = Index(h_) * w_;
  if (u.size() != n || v.size() != n) throw DimensionError("Fft2::correlate: size");
  std::vector<std::complex<double>> fu(spectrum_size()), fv(spectrum_size());
  forward(u.data(), fu.data());
  forward(v.data(), fv.data());
  for (Index i = 0; i < spectrum_size(); ++i) fu[i] *= std::conj(fv[i]);
  out.resize(n);
  inverse(fu.data(), out.data());
}

}  // namespace pmvb
