#include "pmvb/potentials.hpp"

#include <cmath>
#include <string>

namespace pmvb {

SuperGaussianPotential SuperGaussianPotential::laplacian(double tau) {
  if (tau <= 0.0) throw DomainError("laplacian: tau must be positive");
  SuperGaussianPotential p;
  p.family = Family::Laplacian;
  p.tau = tau;
  return p;
}

SuperGaussianPotential SuperGaussianPotential::student_t(double nu, double scale) {
  if (nu <= 0.0 || scale <= 0.0) throw DomainError("student_t: nu, scale must be positive");
  SuperGaussianPotential p;
  p.family = Family::StudentT;
  p.nu = nu;
  p.scale = scale;
  return p;
}

double log_potential(const SuperGaussianPotential& pot, double s) {
  if (!std::isfinite(s)) throw DomainError("log_potential: s not finite");
  switch (pot.family) {
    case SuperGaussianPotential::Family::Laplacian:
      return -pot.tau * std::abs(s);
    case SuperGaussianPotential::Family::StudentT: {
      const double q = s * s / (pot.nu * pot.scale * pot.scale);
      return -0.5 * (pot.nu + 1.0) * std::log1p(q);
    }
  }
  return 0.0;
}

namespace {

// f(s) = -s^2/gamma - 2 log t(s), maximized over s >= 0 (t is even).
double dual_objective(const SuperGaussianPotential& pot, double gamma, double s) {
  return -s * s / gamma - 2.0 * log_potential(pot, s);
}

// Guarded bracket expansion followed by golden-section maximization.
double numeric_sup(const SuperGaussianPotential& pot, double gamma) {
  double lo = 0.0;
  double f_lo = dual_objective(pot, gamma, lo);

  // expand until the objective turns down
  double step = 1e-6;
  double best_s = lo, best_f = f_lo;
  double hi = 0.0;
  bool bracketed = false;
  while (step < 1e12) {
    const double s = step;
    const double f = dual_objective(pot, gamma, s);
    if (f > best_f) {
      best_f = f;
      best_s = s;
    } else if (s > best_s) {
      hi = s;
      bracketed = true;
      break;
    }
    step *= 2.0;
  }
  if (!bracketed) {
    if (best_s == 0.0) return best_f;  // maximum at the origin
    throw DomainError("h_dual: numeric sup failed to bracket; last s = " +
                      std::to_string(step) + ", best objective " + std::to_string(best_f));
  }

  double a = 0.0, b = hi;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = dual_objective(pot, gamma, c);
  double fd = dual_objective(pot, gamma, d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + b); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = dual_objective(pot, gamma, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = dual_objective(pot, gamma, d);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

double h_dual(const SuperGaussianPotential& pot, double gamma) {
  if (gamma <= 0.0) throw DomainError("h_dual: gamma must be positive");
  if (pot.family == SuperGaussianPotential::Family::Laplacian)
    return pot.tau * pot.tau * gamma;
  return numeric_sup(pot, gamma);
}

double gamma_update(const SuperGaussianPotential& pot, double v) {
  if (v <= 0.0) throw DomainError("gamma_update: v must be positive");
  switch (pot.family) {
    case SuperGaussianPotential::Family::Laplacian:
      return pot.tau / std::sqrt(v);
    case SuperGaussianPotential::Family::StudentT:
      // -2 d/dv [ -(nu+1)/2 log(1 + v/(nu scale^2)) ] = (nu+1)/(nu scale^2 + v)
      return (pot.nu + 1.0) / (pot.nu * pot.scale * pot.scale + v);
  }
  return 0.0;
}

Potentials Potentials::shared(SuperGaussianPotential pot, Index rows) {
  Potentials p;
  p.pots_ = {pot};
  p.rows_ = rows;
  p.shared_ = true;
  return p;
}

Potentials Potentials::per_row(std::vector<SuperGaussianPotential> pots) {
  Potentials p;
  p.rows_ = static_cast<Index>(pots.size());
  p.pots_ = std::move(pots);
  p.shared_ = false;
  return p;
}

}  // namespace pmvb
