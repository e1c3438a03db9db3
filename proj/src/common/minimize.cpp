#include "cryptofolio/minimize.hpp"

#include <cmath>
#include <limits>

namespace cryptofolio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f,
                 const Eigen::VectorXd& x, int& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

double fd_width(double x, double rel_step) { return rel_step * std::max(1.0, std::abs(x)); }

}  // namespace

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_width(x[i], rel_step);
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd p = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = fd_width(x[i], rel_step);
    p[i] = x[i] + hi;
    const double fp = f(p);
    p[i] = x[i] - hi;
    const double fm = f(p);
    p[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = fd_width(x[j], rel_step);
      p[i] = x[i] + hi; p[j] = x[j] + hj;
      const double fpp = f(p);
      p[j] = x[j] - hj;
      const double fpm = f(p);
      p[i] = x[i] - hi;
      const double fmm = f(p);
      p[j] = x[j] + hj;
      const double fmp = f(p);
      p[i] = x[i]; p[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return hess;
}

MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  MinimizeResult result;
  result.x = x0;
  result.value = safe_eval(f, x0, result.evaluations);
  result.initial_value = result.value;
  if (!std::isfinite(result.value)) return result;

  auto gradient = [&](const Eigen::VectorXd& x) {
    result.evaluations += static_cast<int>(2 * n);
    return numeric_gradient(
        [&](const Eigen::VectorXd& z) {
          const double v = f(z);
          return std::isfinite(v) ? v : 1e300;
        },
        x, options.fd_step);
  };

  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = gradient(result.x);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_hess * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_hess.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }

    // Armijo backtracking; the first trial is the full quasi-Newton step.
    double t = 1.0;
    double trial_value = kInf;
    Eigen::VectorXd trial;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = result.x + t * dir;
      trial_value = safe_eval(f, trial, result.evaluations);
      if (trial_value <= result.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (inv_hess.isIdentity()) {
        // No descent possible along the gradient: stationary up to FD noise.
        result.converged = g.lpNorm<Eigen::Infinity>() < 1e-4;
        break;
      }
      inv_hess.setIdentity();
      continue;
    }

    const Eigen::VectorXd step = trial - result.x;
    const Eigen::VectorXd g_new = gradient(trial);
    const Eigen::VectorXd y = g_new - g;
    result.x = trial;
    result.value = trial_value;
    g = g_new;

    if (step.lpNorm<Eigen::Infinity>() < options.step_tolerance) {
      result.converged = true;
      break;
    }
    const double sy = step.dot(y);
    if (sy > 1e-12 * step.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      inv_hess = (eye - rho * step * y.transpose()) * inv_hess *
                     (eye - rho * y * step.transpose()) +
                 rho * step * step.transpose();
    }
  }
  return result;
}

}  // namespace cryptofolio
