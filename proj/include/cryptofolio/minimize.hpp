#pragma once

#include <Eigen/Dense>

#include <functional>

namespace cryptofolio {

struct MinimizeOptions {
  int max_iterations = 500;
  /// Converged when the infinity norm of the accepted step drops below this.
  double step_tolerance = 1e-7;
  double gradient_tolerance = 1e-9;
  /// Relative finite-difference step for the central-difference gradient.
  double fd_step = 1e-6;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Deterministic BFGS on an unconstrained objective with central-difference
/// gradients and Armijo backtracking. Non-finite objective values are treated
/// as +inf, so callers can encode hard constraints by returning NaN/inf.
/// The returned point never has a larger value than the starting point.
MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const MinimizeOptions& options = {});

/// Central-difference gradient, exposed for tests and Hessian estimates.
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step);

/// Symmetric central-difference Hessian.
Eigen::MatrixXd numeric_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double rel_step);

}  // namespace cryptofolio
