#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pmvb/circulant.hpp"
#include "pmvb/conv2.hpp"
#include "pmvb/dense.hpp"
#include "pmvb/finite_difference.hpp"
#include "pmvb/gmrf.hpp"
#include "pmvb/lanczos.hpp"
#include "pmvb/lbfgs.hpp"
#include "pmvb/rng.hpp"
#include "pmvb/varbayes.hpp"

using namespace pmvb;
using namespace pmvb::testing;

namespace {

// adapter so dense oracles can see the preconditioner as a plain operator
class SpdRefOperator final : public LinearOperator {
 public:
  explicit SpdRefOperator(const SpdReference& ref, Index n)
      : LinearOperator(n, n), ref_(&ref) {}

 private:
  void do_apply(ConstVecRef x, VecRef y) const override { ref_->apply(x, y); }
  void do_apply_adjoint(ConstVecRef y, VecRef x) const override { ref_->apply(y, x); }
  const SpdReference* ref_;
};

// unmasked stationary deblur model on a small grid
SparseLinearModel stationary_model(GridDims dims, const Kernel& k, double sigma2,
                                   std::uint64_t seed) {
  SparseLinearModel m;
  m.h = conv2_operator(k, dims);
  m.g = finite_difference_operator(dims);
  m.sigma2 = sigma2;
  m.potentials = Potentials::shared(SuperGaussianPotential::laplacian(15.0), m.g->out_dim());
  m.y = NormalStream(seed, 0).draw(dims.size());
  m.stationary = StationaryStructure{k, dims};
  return m;
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("pcg solves the identity in one iteration") {
  IdentityOperator a(12);
  Vec b = NormalStream(1, 0).draw(12);
  auto [x, report] = pcg_solve(a, b, nullptr, {.tol = 1e-12, .max_iter = 50});
  CHECK(report.iterations == 1);
  CHECK(report.converged);
  CHECK((x - b).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("pcg solves a diagonal system") {
  Vec d(3);
  d << 1, 2, 3;
  DiagonalOperator a(d);
  Vec b = Vec::Ones(3);
  auto [x, report] = pcg_solve(a, b, nullptr, {.tol = 1e-12, .max_iter = 50});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK(x[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("pcg matches a dense factorization on a random SPD system") {
  Mat m = random_spd(50, 42, 1e3);
  DenseOperator a(m);
  Vec b = NormalStream(43, 0).draw(50);
  auto [x, report] = pcg_solve(a, b, nullptr, {.tol = 1e-12, .max_iter = 500});
  Vec x_ref = m.llt().solve(b);
  CHECK((x - x_ref).norm() / x_ref.norm() < 1e-8);
  CHECK(report.converged);
  CHECK(report.final_relres() <= 1e-12);
}

TEST_CASE("pcg reports divergence with the iteration number") {
  Mat m = -Mat::Identity(4, 4);  // negative definite
  DenseOperator a(m);
  Vec b = Vec::Ones(4);
  CHECK_THROWS_AS(pcg_solve(a, b, nullptr, {.tol = 1e-8, .max_iter = 10}), SolverError);
  try {
    pcg_solve(a, b, nullptr, {.tol = 1e-8, .max_iter = 10});
  } catch (const SolverError& e) {
    CHECK(e.iteration() == 1);
  }
}

TEST_CASE("residual trace: final entry below tol iff converged") {
  Mat m = random_spd(40, 7, 1e4);
  DenseOperator a(m);
  Vec b = NormalStream(8, 0).draw(40);
  auto r1 = pcg_solve(a, b, nullptr, {.tol = 1e-10, .max_iter = 500});
  CHECK(r1.report.converged);
  CHECK(r1.report.final_relres() <= 1e-10);
  auto r2 = pcg_solve(a, b, nullptr, {.tol = 1e-10, .max_iter = 3});
  CHECK_FALSE(r2.report.converged);
  CHECK(r2.report.final_relres() > 1e-10);
}

TEST_CASE("uniform gamma makes the circulant preconditioner exact: PCG <= 2 iterations") {
  const GridDims dims{10, 9};
  auto model = stationary_model(dims, make_gaussian_kernel(3, 0.8), 1e-3, 3);
  Vec gamma = Vec::Constant(model.k(), 0.2);
  GmrfSystem sys = assemble_system(model, gamma);
  auto precond = circulant_preconditioner(model, gamma);

  GmrfSystemOperator a(sys);
  Vec b = NormalStream(5, 0).draw(dims.size());
  auto [x, report] = pcg_solve(a, b, precond.get(), {.tol = 1e-10, .max_iter = 50});
  CHECK(report.converged);
  CHECK(report.iterations <= 2);
}

TEST_CASE("circulant log-determinant matches the dense Cholesky oracle") {
  const GridDims dims{8, 8};
  const double sigma2 = 0.05, gbar_inv = 3.7;
  CirculantPreconditioner p(make_gaussian_kernel(3, 1.0), dims, sigma2, gbar_inv);
  Mat pd = materialize_dense(SpdRefOperator(p, dims.size()));
  const double oracle = 2.0 * Mat(pd.llt().matrixL()).diagonal().array().log().sum();
  CHECK(p.log_det() == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("apply and apply_inverse are mutual inverses") {
  const GridDims dims{6, 11};
  CirculantPreconditioner p(make_motion_kernel(3, 15.0), dims, 0.01, 1.0);
  Vec x = NormalStream(17, 0).draw(dims.size());
  Vec px(dims.size()), back(dims.size());
  p.apply(x, px);
  p.apply_inverse(px, back);
  CHECK((back - x).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("the preconditioner is Frobenius-nearest among random stationary matrices") {
  const GridDims dims{8, 8};
  auto model = stationary_model(dims, make_gaussian_kernel(3, 1.2), 0.01, 11);
  Vec gamma = random_gamma(model.k(), 21, 1e-3, 1.0);
  GmrfSystem sys = assemble_system(model, gamma);
  Mat a = materialize_dense(GmrfSystemOperator(sys));

  const double gbar_inv = gamma.cwiseInverse().mean();
  CirculantPreconditioner p(make_gaussian_kernel(3, 1.2), dims, model.sigma2, gbar_inv);
  const double dist_p = (materialize_dense(SpdRefOperator(p, dims.size())) - a).norm();

  NormalStream stream(77, 0);
  for (int t = 0; t < 20; ++t) {
    Kernel rk(3, 3);
    for (Index i = 0; i < 9; ++i) rk.taps[i] = stream.next();
    const double c = std::exp(stream.next());
    CirculantPreconditioner q(rk, dims, model.sigma2, c);
    const double dist_q = (materialize_dense(SpdRefOperator(q, dims.size())) - a).norm();
    CHECK(dist_p <= dist_q);
  }
}

TEST_CASE("indefinite stationary approximations are rejected") {
  Kernel zero_sum(1, 3);
  zero_sum.taps << -1.0, 0.0, 1.0;  // DC gain 0 and no G term
  CHECK_THROWS_AS(CirculantPreconditioner(zero_sum, {6, 6}, 1.0, 0.0), DomainError);
}

TEST_CASE("full-space lanczos reproduces exact variances") {
  Mat m = random_spd(30, 5, 50.0);
  DenseOperator a(m);
  IdentityOperator g(30);
  LanczosResult r = lanczos_variance(a, g, 30, 9);
  Vec exact = m.inverse().diagonal();
  CHECK(r.iterations == 30);
  CHECK(((r.z - exact).cwiseAbs().array() / exact.array()).maxCoeff() < 1e-6);
}

TEST_CASE("truncated lanczos underestimates every variance") {
  Mat m = random_spd(30, 5, 50.0);
  DenseOperator a(m);
  IdentityOperator g(30);
  LanczosResult r = lanczos_variance(a, g, 5, 9);
  Vec exact = m.inverse().diagonal();
  for (Index k = 0; k < 30; ++k) CHECK(r.z[k] <= exact[k] * (1.0 + 1e-12));
}

TEST_CASE("lanczos on the identity captures all variances in one step") {
  IdentityOperator a(8), g(8);
  LanczosResult r = lanczos_variance(a, g, 1, 4);
  for (Index k = 0; k < 8; ++k) CHECK(r.z[k] == doctest::Approx(1.0));
}

TEST_CASE("lanczos estimates are monotone non-decreasing in iteration count") {
  Mat m = random_spd(40, 13, 200.0);
  DenseOperator a(m);
  IdentityOperator g(40);
  Vec prev = Vec::Zero(40);
  for (int iters : {2, 5, 10, 20, 40}) {
    LanczosResult r = lanczos_variance(a, g, iters, 31);
    for (Index k = 0; k < 40; ++k) CHECK(r.z[k] >= prev[k] - 1e-12);
    prev = r.z;
  }
}

TEST_CASE("lbfgs: quadratic reaches the minimizer within two iterations") {
  Vec target = NormalStream(3, 0).draw(6);
  auto f = [&](ConstVecRef x, VecRef g) {
    g = x - target;
    return 0.5 * (x - target).squaredNorm();
  };
  LbfgsResult r = lbfgs_minimize(f, Vec::Zero(6), {.grad_tol = 1e-10});
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK((r.x - target).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("lbfgs: rosenbrock from (-1.2, 1)") {
  auto f = [](ConstVecRef x, VecRef g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vec x0(2);
  x0 << -1.2, 1.0;
  LbfgsResult r = lbfgs_minimize(f, x0, {.grad_tol = 1e-10, .max_iter = 200});
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-6);
}

TEST_CASE("lbfgs trace is monotone non-increasing") {
  Mat m = random_spd(25, 19, 1e4);
  Vec target = NormalStream(20, 0).draw(25);
  auto f = [&](ConstVecRef x, VecRef g) {
    Vec mx = m * x;
    g = mx - target;
    return 0.5 * x.dot(mx) - target.dot(x);
  };
  LbfgsResult r = lbfgs_minimize(f, Vec::Zero(25), {.max_iter = 300});
  for (size_t i = 1; i < r.f_trace.size(); ++i) CHECK(r.f_trace[i] <= r.f_trace[i - 1] + 1e-12);
}

TEST_CASE("lbfgs matches a dense Newton oracle on a smoothed deblur objective") {
  const GridDims dims{8, 8};
  auto model = stationary_model(dims, make_gaussian_kernel(3, 0.9), 0.01, 55);
  Vec z = Vec::Constant(model.k(), 1e-3);
  SmoothedObjective obj(model, z);

  LbfgsResult r = lbfgs_minimize([&](ConstVecRef x, VecRef g) { return obj(x, g); },
                                 Vec::Zero(dims.size()), {.grad_tol = 1e-9, .max_iter = 500});
  CHECK(r.grad.lpNorm<Eigen::Infinity>() <= 1e-9);

  // oracle: damped Newton with the analytic Hessian of the smoothed objective
  Mat hd = materialize_dense(*model.h);
  Mat gd = materialize_dense(*model.g);
  const double tau = 15.0;
  auto value = [&](const Vec& x) { return obj.value(x); };
  auto grad = [&](const Vec& x) {
    Vec g(x.size());
    obj(x, g);
    return g;
  };
  auto hess = [&](const Vec& x) {
    Vec s = gd * x;
    Vec d(s.size());
    for (Index k = 0; k < s.size(); ++k) {
      const double v = s[k] * s[k] + z[k];
      d[k] = tau * z[k] / (v * std::sqrt(v));
    }
    return Mat(2.0 / model.sigma2 * hd.transpose() * hd +
               gd.transpose() * d.asDiagonal() * gd);
  };
  Vec x_newton = dense_newton_minimize(value, grad, hess, Vec::Zero(dims.size()));
  CHECK(value(r.x) == doctest::Approx(value(x_newton)).epsilon(1e-6));
}

TEST_CASE("preconditioned CG never needs more iterations than CG on a deblur system") {
  const GridDims dims{12, 12};
  auto model = stationary_model(dims, make_motion_kernel(5, 35.0), 1e-4, 61);
  Vec gamma = random_gamma(model.k(), 62, 1e-3, 0.3);
  GmrfSystem sys = assemble_system(model, gamma);
  auto precond = circulant_preconditioner(model, gamma);
  GmrfSystemOperator a(sys);
  Vec b = NormalStream(63, 0).draw(dims.size());

  for (double tol : {1e-2, 1e-4, 1e-6}) {
    auto cg = pcg_solve(a, b, nullptr, {.tol = tol, .max_iter = 4000});
    auto pcg = pcg_solve(a, b, precond.get(), {.tol = tol, .max_iter = 4000});
    CHECK(cg.report.converged);
    CHECK(pcg.report.converged);
    CHECK(pcg.report.iterations <= cg.report.iterations);
  }
}

}  // TEST_SUITE
