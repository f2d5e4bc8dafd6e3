#include <doctest.h>

#include "fixtures.hpp"
#include "pmvb/conv2.hpp"
#include "pmvb/dense.hpp"
#include "pmvb/finite_difference.hpp"
#include "pmvb/rng.hpp"

using namespace pmvb;
using testing::make_box_kernel;

namespace {

Vec random_vec(Index n, std::uint64_t seed) { return NormalStream(seed, 0).draw(n); }

// independent brute-force circulant materialization: C[p, q] += k[a] where
// q = p - a (mod dims)
Mat dense_circulant(const Kernel& k, GridDims d) {
  Mat c = Mat::Zero(d.size(), d.size());
  const int ch = k.center_row(), cw = k.center_col();
  for (int i = 0; i < d.height; ++i)
    for (int j = 0; j < d.width; ++j) {
      const Index p = Index(i) * d.width + j;
      for (int di = -ch; di <= ch; ++di)
        for (int dj = -cw; dj <= cw; ++dj) {
          const int si = ((i - di) % d.height + d.height) % d.height;
          const int sj = ((j - dj) % d.width + d.width) % d.width;
          c(p, Index(si) * d.width + sj) += k.at_offset(di, dj);
        }
    }
  return c;
}

double adjoint_gap(const LinearOperator& op, std::uint64_t seed) {
  Vec x = random_vec(op.in_dim(), seed);
  Vec y = random_vec(op.out_dim(), seed + 1);
  const double lhs = op.apply(x).dot(y);
  const double rhs = x.dot(op.apply_adjoint(y));
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("conv2 identity kernel is the identity map") {
  auto op = conv2_operator(Kernel::identity(), {5, 7});
  Vec x = random_vec(35, 11);
  CHECK((op->apply(x) - x).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
  CHECK(op->apply(x).size() == op->out_dim());
}

TEST_CASE("conv2 shift kernel preserves constants") {
  Kernel shift(1, 3);
  shift.taps << 0.0, 0.0, 1.0;
  auto op = conv2_operator(shift, {4, 6});
  Vec c = Vec::Constant(24, 0.37);
  CHECK((op->apply(c) - c).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("conv2 3x3 box on 8x8 matches the dense circulant oracle") {
  const Kernel k = make_box_kernel(3, 3);
  const GridDims d{8, 8};
  auto op = conv2_operator(k, d);
  const Mat c = dense_circulant(k, d);
  Vec x = random_vec(d.size(), 5);
  CHECK((op->apply(x) - c * x).lpNorm<Eigen::Infinity>() < 1e-13);
  CHECK((op->apply_adjoint(x) - c.transpose() * x).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("conv2 rejects kernels larger than the domain") {
  CHECK_THROWS_AS(conv2_operator(make_box_kernel(5, 5), {3, 8}), DimensionError);
}

TEST_CASE("finite differences annihilate constants") {
  auto g = finite_difference_operator({6, 5});
  Vec c = Vec::Constant(30, 1.23);
  CHECK(g->apply(c).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
  CHECK(g->out_dim() == 60);
}

TEST_CASE("finite differences on the 2x2 wrap-around stencil") {
  auto g = finite_difference_operator({2, 2});
  Vec x(4);
  x << 0, 1, 0, 1;  // [[0,1],[0,1]]
  Vec y = g->apply(x);
  // horizontal: each pixel sees |x[i, j+1] - x[i, j]| = 1
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(y[i]) == doctest::Approx(1.0));
  // vertical differences vanish (columns constant, periodic)
  for (Index i = 4; i < 8; ++i) CHECK(y[i] == doctest::Approx(0.0));
}

TEST_CASE("finite differences satisfy the adjoint identity on 100 random pairs") {
  auto g = finite_difference_operator({6, 6});
  Vec x = random_vec(36, 3);
  for (int t = 0; t < 100; ++t) {
    Vec u = random_vec(72, 100 + t);
    const double lhs = g->apply(x).dot(u);
    const double rhs = x.dot(g->apply_adjoint(u));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("materialize_dense basics and guard") {
  CHECK(materialize_dense(IdentityOperator(3)).isIdentity(1e-15));
  auto conv = conv2_operator(Kernel::identity(), {3, 3});
  CHECK(materialize_dense(*conv).isIdentity(1e-15));

  auto g = finite_difference_operator({3, 3});
  Mat gd = materialize_dense(*g);
  CHECK(gd.rows() == 18);
  CHECK(gd.cols() == 9);
  for (Index r = 0; r < gd.rows(); ++r) CHECK(gd.row(r).sum() == doctest::Approx(0.0));

  CHECK_THROWS_AS(materialize_dense(IdentityOperator(3000)), SizeGuardError);
}

TEST_CASE("adjoint identity holds for every exported operator") {
  auto conv = conv2_operator(testing::make_motion_kernel(5, 30.0), {9, 11});
  auto fd = finite_difference_operator({9, 11});
  auto crop = std::make_shared<const CropOperator>(GridDims{9, 11}, 2, 3, GridDims{5, 6});
  auto scaled = std::make_shared<const ScaledOperator>(-2.5, conv);
  StackedOperator stacked({conv, fd, scaled});
  ComposedOperator composed(crop, conv);

  CHECK(adjoint_gap(*conv, 21) < 1e-10);
  CHECK(adjoint_gap(*fd, 22) < 1e-10);
  CHECK(adjoint_gap(*crop, 23) < 1e-10);
  CHECK(adjoint_gap(*scaled, 24) < 1e-10);
  CHECK(adjoint_gap(stacked, 25) < 1e-10);
  CHECK(adjoint_gap(composed, 26) < 1e-10);
}

TEST_CASE("periodic convolution is a normal operator") {
  auto op = conv2_operator(testing::make_motion_kernel(3, 70.0), {7, 6});
  Mat c = materialize_dense(*op);
  CHECK((c * c.transpose() - c.transpose() * c).norm() <= 1e-9);
}

TEST_CASE("finite-difference nullspace is exactly the constants") {
  auto g = finite_difference_operator({4, 5});
  Mat gd = materialize_dense(*g);
  Eigen::JacobiSVD<Mat> svd(gd);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  CHECK(rank == 19);  // N - 1
}

TEST_CASE("dimension mismatches throw") {
  auto op = conv2_operator(Kernel::identity(), {4, 4});
  Vec wrong(7);
  Vec out(16);
  CHECK_THROWS_AS(op->apply(wrong, out), DimensionError);
  CHECK_THROWS_AS(FiniteDifferenceOperator({1, 5}), DimensionError);
  CHECK_THROWS_AS(Kernel(2, 3), DimensionError);
}

}  // TEST_SUITE
