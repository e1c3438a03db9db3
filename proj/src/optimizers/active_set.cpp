#include "cryptofolio/optimizers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cryptofolio::optimizers {

namespace {

std::vector<Eigen::Index> indices_where(const std::vector<bool>& mask, bool value) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == value) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

// Least-squares multipliers for A_F' lambda = g_F (minimum norm).
Eigen::VectorXd equality_multipliers(const QuadraticProgram& qp, const Eigen::VectorXd& g,
                                     const std::vector<Eigen::Index>& free_set) {
  const Eigen::Index m = qp.eq_matrix.rows();
  if (free_set.empty() || m == 0) return Eigen::VectorXd::Zero(m);
  const Eigen::MatrixXd a_free_t = select_columns(qp.eq_matrix, free_set).transpose();
  Eigen::VectorXd g_free(static_cast<Eigen::Index>(free_set.size()));
  for (std::size_t k = 0; k < free_set.size(); ++k) g_free[static_cast<Eigen::Index>(k)] = g[free_set[k]];
  return a_free_t.completeOrthogonalDecomposition().solve(g_free);
}

double objective_value(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x);
}

double kkt_residual_on(const QuadraticProgram& qp, const Eigen::VectorXd& x,
                       const std::vector<bool>& at_bound, Eigen::VectorXd* eq_multipliers,
                       Eigen::VectorXd* bound_multipliers) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd g = qp.hessian * x + qp.linear;
  const auto free_set = indices_where(at_bound, false);
  const Eigen::VectorXd lambda = equality_multipliers(qp, g, free_set);
  Eigen::VectorXd z = g - qp.eq_matrix.transpose() * lambda;

  double residual = 0.0;
  if (qp.eq_matrix.rows() > 0) {
    residual = (qp.eq_matrix * x - qp.eq_rhs).lpNorm<Eigen::Infinity>();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (at_bound[k]) {
      residual = std::max({residual, -z[i], std::abs(x[i] * z[i]), -x[i]});
    } else {
      residual = std::max(residual, std::abs(z[i]));
      if (qp.nonnegative[k]) residual = std::max(residual, -x[i]);
      z[i] = 0.0;
    }
  }
  if (eq_multipliers) *eq_multipliers = lambda;
  if (bound_multipliers) *bound_multipliers = z;
  return residual;
}

}  // namespace

double qp_kkt_residual(const QuadraticProgram& qp, const Eigen::VectorXd& x,
                       double active_tolerance, Eigen::VectorXd* eq_multipliers,
                       Eigen::VectorXd* bound_multipliers) {
  std::vector<bool> at_bound(static_cast<std::size_t>(x.size()), false);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    at_bound[static_cast<std::size_t>(i)] = qp.nonnegative[static_cast<std::size_t>(i)] &&
                                           x[i] <= active_tolerance;
  }
  return kkt_residual_on(qp, x, at_bound, eq_multipliers, bound_multipliers);
}

QpSolution solve_qp(const QuadraticProgram& qp, const Eigen::VectorXd& x0, const QpOptions& options) {
  const Eigen::Index n = x0.size();
  if (qp.hessian.rows() != n || qp.hessian.cols() != n || qp.linear.size() != n ||
      qp.eq_matrix.cols() != n || qp.eq_rhs.size() != qp.eq_matrix.rows() ||
      static_cast<Eigen::Index>(qp.nonnegative.size()) != n) {
    throw std::invalid_argument("solve_qp: inconsistent problem dimensions");
  }
  if (qp.eq_matrix.rows() > 0 &&
      (qp.eq_matrix * x0 - qp.eq_rhs).lpNorm<Eigen::Infinity>() > 1e3 * options.feasibility_tolerance) {
    throw SolverError("solve_qp: starting point violates the equality constraints");
  }

  Eigen::VectorXd x = x0;
  std::vector<bool> working(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!qp.nonnegative[k]) continue;
    if (x[i] < -options.feasibility_tolerance) {
      throw SolverError("solve_qp: starting point violates a bound");
    }
    if (x[i] <= 0.0) {
      x[i] = 0.0;
      working[k] = true;
    }
  }

  const double h_scale = std::max(qp.hessian.cwiseAbs().maxCoeff(), 1e-300);
  const double curvature_tol = 1e-11 * h_scale;
  const double g_scale = std::max(1.0, qp.linear.lpNorm<Eigen::Infinity>() + h_scale);
  const double release_tol = 1e-13 * g_scale;
  const double direction_tol = 1e-14 * g_scale;

  QpSolution sol;
  bool optimal = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    sol.iterations = iter;
    const Eigen::VectorXd g = qp.hessian * x + qp.linear;
    const auto free_set = indices_where(working, false);
    const auto nf = static_cast<Eigen::Index>(free_set.size());

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    bool unbounded_direction = false;
    if (nf > 0) {
      const Eigen::MatrixXd a_free = select_columns(qp.eq_matrix, free_set);
      Eigen::MatrixXd z_basis;
      if (a_free.rows() == 0) {
        z_basis = Eigen::MatrixXd::Identity(nf, nf);
      } else {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_free, Eigen::ComputeFullV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double sv_tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
        Eigen::Index rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
          if (sv[k] > sv_tol) ++rank;
        }
        z_basis = svd.matrixV().rightCols(nf - rank);
      }
      if (z_basis.cols() > 0) {
        Eigen::MatrixXd h_free(nf, nf);
        Eigen::VectorXd g_free(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
          g_free[a] = g[free_set[static_cast<std::size_t>(a)]];
          for (Eigen::Index b = 0; b < nf; ++b) {
            h_free(a, b) = qp.hessian(free_set[static_cast<std::size_t>(a)],
                                      free_set[static_cast<std::size_t>(b)]);
          }
        }
        const Eigen::MatrixXd h_red = z_basis.transpose() * h_free * z_basis;
        const Eigen::VectorXd g_red = z_basis.transpose() * g_free;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h_red + h_red.transpose()));
        const Eigen::VectorXd& lam = eig.eigenvalues();
        const Eigen::MatrixXd& vec = eig.eigenvectors();
        Eigen::VectorXd d = Eigen::VectorXd::Zero(z_basis.cols());
        for (Eigen::Index k = 0; k < lam.size(); ++k) {
          if (lam[k] <= curvature_tol) {
            const double coef = vec.col(k).dot(g_red);
            if (std::abs(coef) > direction_tol) {
              d -= coef * vec.col(k);
              unbounded_direction = true;
            }
          }
        }
        if (!unbounded_direction) {
          for (Eigen::Index k = 0; k < lam.size(); ++k) {
            if (lam[k] > curvature_tol) d -= (vec.col(k).dot(g_red) / lam[k]) * vec.col(k);
          }
        }
        const Eigen::VectorXd p_free = z_basis * d;
        for (Eigen::Index a = 0; a < nf; ++a) p[free_set[static_cast<std::size_t>(a)]] = p_free[a];
      }
    }

    const double step_floor = 1e-13 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    if (!unbounded_direction && p.lpNorm<Eigen::Infinity>() <= step_floor) {
      // Stationary on the current face: release the most negative bound
      // multiplier, lowest index on ties.
      const Eigen::VectorXd lambda = equality_multipliers(qp, g, free_set);
      const Eigen::VectorXd z = g - qp.eq_matrix.transpose() * lambda;
      Eigen::Index release = -1;
      double most_negative = -release_tol;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (working[static_cast<std::size_t>(i)] && z[i] < most_negative) {
          most_negative = z[i];
          release = i;
        }
      }
      if (release < 0) {
        optimal = true;
        break;
      }
      working[static_cast<std::size_t>(release)] = false;
      continue;
    }

    double alpha = unbounded_direction ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (working[k] || !qp.nonnegative[k] || !(p[i] < 0.0)) continue;
      const double ratio = std::max(0.0, x[i]) / -p[i];
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    if (!std::isfinite(alpha)) throw SolverError("solve_qp: objective unbounded below");
    x += alpha * p;
    if (blocking >= 0) {
      x[blocking] = 0.0;
      working[static_cast<std::size_t>(blocking)] = true;
    }
  }

  if (!optimal) {
    throw SolverError("solve_qp: iteration cap of " + std::to_string(options.max_iterations) +
                      " reached");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (working[static_cast<std::size_t>(i)]) sol.working_set.push_back(i);
  }
  sol.x = x;
  sol.objective = objective_value(qp, x);
  // Degenerate vertices admit several multiplier vectors; use the ones that
  // certified the final working set.
  sol.kkt_residual = kkt_residual_on(qp, x, working, &sol.eq_multipliers, &sol.bound_multipliers);
  if (!(sol.kkt_residual <= options.kkt_tolerance)) {
    throw SolverError("solve_qp: KKT residual " + std::to_string(sol.kkt_residual) +
                      " exceeds tolerance");
  }
  return sol;
}

}  // namespace cryptofolio::optimizers
