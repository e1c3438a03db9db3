#pragma once

#include "cryptofolio/parallel.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cryptofolio::optimizers {

// ---------------------------------------------------------------------------
// Convex QP in standard form:
//   minimize 1/2 x'Hx + c'x  subject to  A x = b,  x_i >= 0 for flagged i.
// ---------------------------------------------------------------------------

struct QuadraticProgram {
  Eigen::MatrixXd hessian;          // n x n, symmetric PSD (may be singular)
  Eigen::VectorXd linear;           // n
  Eigen::MatrixXd eq_matrix;        // m x n
  Eigen::VectorXd eq_rhs;           // m
  std::vector<bool> nonnegative;    // n; false means the variable is free
};

struct QpOptions {
  double kkt_tolerance = 1e-8;
  double feasibility_tolerance = 1e-10;
  int max_iterations = 100;
};

struct QpSolution {
  Eigen::VectorXd x;
  /// Multipliers of the equality rows, sign convention grad = A'lambda + z.
  Eigen::VectorXd eq_multipliers;
  /// Bound multipliers z (zero for variables off their bound).
  Eigen::VectorXd bound_multipliers;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  /// Variables held at zero in the final working set, ascending.
  std::vector<Eigen::Index> working_set;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Primal active-set method started from a feasible point `x0`. Singular
/// reduced Hessians are handled with minimum-norm steps; zero-curvature
/// descent directions are followed to the nearest blocking bound. Ties in
/// blocking and release decisions go to the lowest index. Throws SolverError
/// on an infeasible start, an unbounded direction or the iteration cap.
QpSolution solve_qp(const QuadraticProgram& qp, const Eigen::VectorXd& x0,
                    const QpOptions& options = {});

/// Stationarity, dual and primal feasibility, and complementarity residual of
/// a point, with least-squares multipliers. Infinity norm.
double qp_kkt_residual(const QuadraticProgram& qp, const Eigen::VectorXd& x,
                       double active_tolerance, Eigen::VectorXd* eq_multipliers = nullptr,
                       Eigen::VectorXd* bound_multipliers = nullptr);

// ---------------------------------------------------------------------------
// Portfolio problems on the long-only simplex.
// ---------------------------------------------------------------------------

enum class Framework { mv, mvc, gmv, gmvc, one_over_n };

std::string_view to_string(Framework f);
Framework parse_framework(std::string_view text);

/// True for the frameworks that carry a turnover penalty.
inline bool penalized(Framework f) { return f == Framework::mvc || f == Framework::gmvc; }
/// True for the frameworks that use the mean estimate.
inline bool uses_mean(Framework f) { return f == Framework::mv || f == Framework::mvc; }

/// Weights on the simplex: each entry in [0, 1] and the sum within 1e-10 of 1.
class WeightVector {
 public:
  static constexpr double kTolerance = 1e-10;

  explicit WeightVector(Eigen::VectorXd values);
  static WeightVector equal(Eigen::Index n);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Eigen::VectorXd values_;
};

struct SolverOptions {
  double kkt_tolerance = 1e-8;
  double feasibility_tolerance = 1e-10;
  /// 0 selects 10 N^2 (N assets).
  int max_iterations = 0;
  /// When false the w >= 0 constraint is dropped, leaving only the budget.
  bool long_only = true;
};

struct SolveReport {
  Eigen::VectorXd weights;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  /// Assets held at the w_i = 0 bound.
  std::vector<Eigen::Index> active_set;
  /// Subgradient of ||w - w_prev||_1 at the solution recovered from the KKT
  /// multipliers (penalized problems with beta > 0); zeros otherwise.
  Eigen::VectorXd turnover_subgradient;
};

/// (gamma/2) w'Sigma w - w'mu over the simplex.
SolveReport solve_mv(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                     const SolverOptions& options = {});

/// (gamma/2) w'Sigma w + beta ||w - w_prev||_1 - w'mu over the simplex. The
/// pre-trade book `w_prev` may be the zero vector (first rebalance).
SolveReport solve_mvc(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                      double beta, const Eigen::VectorXd& w_prev,
                      const SolverOptions& options = {});

SolveReport solve_gmv(const Eigen::MatrixXd& sigma, double gamma, const SolverOptions& options = {});

SolveReport solve_gmvc(const Eigen::MatrixXd& sigma, double gamma, double beta,
                       const Eigen::VectorXd& w_prev, const SolverOptions& options = {});

/// Objective of the penalized problem evaluated at `w` (beta = 0 and mu = 0
/// give the other frameworks).
double portfolio_objective(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                           double beta, const Eigen::VectorXd& w_prev, const Eigen::VectorXd& w);

/// Budget-constrained mean-variance solution (weights may be negative).
/// Requires a strictly positive definite covariance.
Eigen::VectorXd closed_form_mv(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma);

/// mu - beta g*, with g* entries in [-1, 1].
Eigen::VectorXd shifted_mean(const Eigen::VectorXd& mu, double beta, const Eigen::VectorXd& g_star);

/// Sigma + (beta/gamma)(g* 1' + 1 g*').
Eigen::MatrixXd shifted_covariance(const Eigen::MatrixXd& sigma, double beta, double gamma,
                                   const Eigen::VectorXd& g_star);

/// sign(w - w_prev) where the trade exceeds `tolerance`; the KKT-recovered
/// value elsewhere. Throws SolverError when any entry leaves [-1, 1].
Eigen::VectorXd subgradient_at(const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev,
                               double tolerance, const Eigen::VectorXd& kkt_subgradient);

/// KKT residual of min f(w) over the simplex given grad f at w: least-squares
/// budget multiplier on the free set, negative bound multipliers on the rest.
double simplex_kkt_residual(const Eigen::VectorXd& gradient, const Eigen::VectorXd& w,
                            double active_tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Verification oracle.
// ---------------------------------------------------------------------------

struct GridResult {
  Eigen::VectorXd point;
  double value = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive scan of the simplex lattice with spacing `step` (which must
/// divide 1) for N in {2, 3}. Scan order is lexicographic in the leading
/// coordinates; the first minimizer wins ties.
GridResult grid_oracle(const std::function<double(const Eigen::VectorXd&)>& objective,
                       Eigen::Index assets, double step, Exec exec = Exec::parallel);

/// Lipschitz constant of the portfolio objective on the simplex with respect
/// to the infinity norm: N (gamma max_i sum_j |Sigma_ij| + max|mu| + beta).
double objective_lipschitz_bound(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 double gamma, double beta);

}  // namespace cryptofolio::optimizers
