#include "pmvb/conv2.hpp"

namespace pmvb {

Conv2Operator::Conv2Operator(Kernel kernel, GridDims dims)
    : LinearOperator(dims.size(), dims.size()), kernel_(std::move(kernel)), dims_(dims) {
  if (kernel_.height > dims.height || kernel_.width > dims.width)
    throw DimensionError("Conv2Operator: kernel larger than domain");
}

namespace {

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// flip = false: y[p] = sum_a k[a] x[p-a]; flip = true uses k[-a] (adjoint).
void convolve(const Kernel& k, GridDims d, bool flip, ConstVecRef x, VecRef y) {
  const int ch = k.center_row(), cw = k.center_col();
  y.setZero();
  for (int di = -ch; di <= ch; ++di) {
    for (int dj = -cw; dj <= cw; ++dj) {
      const double tap = flip ? k.at_offset(-di, -dj) : k.at_offset(di, dj);
      if (tap == 0.0) continue;
      for (int i = 0; i < d.height; ++i) {
        const int si = wrap(i - di, d.height);
        const Index row_out = Index(i) * d.width;
        const Index row_in = Index(si) * d.width;
        // split the column loop at the wrap point so the inner loop is contiguous
        const int jw = wrap(-dj, d.width);  // source col for j = 0
        int j = 0;
        int sj = jw;
        while (j < d.width) {
          const int run = std::min(d.width - j, d.width - sj);
          y.segment(row_out + j, run) += tap * x.segment(row_in + sj, run);
          j += run;
          sj = (sj + run) % d.width;
        }
      }
    }
  }
}

}  // namespace

void Conv2Operator::do_apply(ConstVecRef x, VecRef y) const {
  convolve(kernel_, dims_, false, x, y);
}

void Conv2Operator::do_apply_adjoint(ConstVecRef y, VecRef x) const {
  convolve(kernel_, dims_, true, y, x);
}

std::shared_ptr<const Conv2Operator> conv2_operator(const Kernel& kernel, GridDims dims) {
  return std::make_shared<const Conv2Operator>(kernel, dims);
}

}  // namespace pmvb
