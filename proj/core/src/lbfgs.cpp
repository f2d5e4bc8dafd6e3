#include "pmvb/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "pmvb/errors.hpp"

namespace pmvb {

namespace {

constexpr double kC1 = 1e-4;  // sufficient decrease
constexpr double kC2 = 0.9;   // curvature

struct LinePoint {
  double t;
  double f;
  double df;  // directional derivative
};

// Cubic interpolation minimizer of a bracketing interval; falls back to
// bisection when the cubic is degenerate or leaves the interval.
double interpolate(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.df + b.df - 3.0 * (a.f - b.f) / (a.t - b.t);
  const double disc = d1 * d1 - a.df * b.df;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.t - a.t);
    const double t = b.t - (b.t - a.t) * (b.df + d2 - d1) / (b.df - a.df + 2.0 * d2);
    const double lo = std::min(a.t, b.t), hi = std::max(a.t, b.t);
    const double margin = 0.1 * (hi - lo);
    if (std::isfinite(t) && t > lo + margin && t < hi - margin) return t;
  }
  return 0.5 * (a.t + b.t);
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& f_and_grad, const Vec& x0,
                           const LbfgsOptions& opts) {
  const Index n = x0.size();
  LbfgsResult res;
  res.x = x0;
  res.grad = Vec(n);
  res.f = f_and_grad(res.x, res.grad);
  if (!std::isfinite(res.f)) throw DomainError("lbfgs_minimize: f(x0) not finite");
  res.f_trace.push_back(res.f);

  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;

  Vec direction(n), x_new(n), grad_new(n);

  auto eval_line = [&](double t, const Vec& x, const Vec& d, LinePoint& out) {
    x_new = x + t * d;
    out.t = t;
    out.f = f_and_grad(x_new, grad_new);
    out.df = grad_new.dot(d);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    // two-loop recursion for d = -H grad
    direction = -res.grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(direction);
      direction -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      direction *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(direction);
      direction += (alpha[i] - beta) * s_hist[i];
    }

    double df0 = res.grad.dot(direction);
    if (df0 >= 0.0) {  // not a descent direction; reset to steepest descent
      direction = -res.grad;
      df0 = res.grad.dot(direction);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // strong Wolfe line search (bracket + zoom)
    const LinePoint p0{0.0, res.f, df0};
    LinePoint prev = p0, cur{};
    double t = 1.0;
    bool accepted = false;
    int trials = 0;
    bool zooming = false;
    LinePoint lo = p0, hi{};

    while (trials < opts.max_line_search) {
      ++trials;
      if (!zooming) {
        eval_line(t, res.x, direction, cur);
        const bool armijo = cur.f <= p0.f + kC1 * cur.t * df0;
        if (!armijo || (prev.t > 0.0 && cur.f >= prev.f)) {
          lo = prev;
          hi = cur;
          zooming = true;
          continue;
        }
        if (std::abs(cur.df) <= -kC2 * df0) {
          accepted = true;
          break;
        }
        if (cur.df >= 0.0) {
          lo = cur;
          hi = prev;
          zooming = true;
          continue;
        }
        prev = cur;
        t *= 2.0;
      } else {
        const double tz = interpolate(lo, hi);
        eval_line(tz, res.x, direction, cur);
        const bool armijo = cur.f <= p0.f + kC1 * cur.t * df0;
        if (!armijo || cur.f >= lo.f) {
          hi = cur;
        } else {
          if (std::abs(cur.df) <= -kC2 * df0) {
            accepted = true;
            break;
          }
          if (cur.df * (hi.t - lo.t) >= 0.0) hi = lo;
          lo = cur;
        }
        if (std::abs(hi.t - lo.t) < 1e-16 * std::max(1.0, std::abs(lo.t))) break;
      }
    }

    if (!accepted) {
      // salvage a plain decrease if the zoom found one
      const LinePoint* best = nullptr;
      if (zooming && lo.t > 0.0 && lo.f < res.f) best = &lo;
      if (best) {
        x_new = res.x + best->t * direction;
        res.f = f_and_grad(x_new, grad_new);
        res.x.swap(x_new);
        res.grad.swap(grad_new);
        res.f_trace.push_back(res.f);
        res.iterations = iter + 1;
      }
      res.line_search_failed = true;
      break;
    }

    x_new = res.x + cur.t * direction;
    Vec s = x_new - res.x;
    Vec yv = grad_new - res.grad;
    const double sy = s.dot(yv);
    if (sy > 1e-16 * s.norm() * yv.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    res.x.swap(x_new);
    res.grad.swap(grad_new);
    res.f = cur.f;
    res.f_trace.push_back(res.f);
    res.iterations = iter + 1;
  }

  if (!res.converged && res.grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol)
    res.converged = true;
  return res;
}

}  // namespace pmvb
