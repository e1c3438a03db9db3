#include "cryptofolio/optimizers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace cryptofolio::optimizers {

std::string_view to_string(Framework f) {
  switch (f) {
    case Framework::mv: return "mv";
    case Framework::mvc: return "mvc";
    case Framework::gmv: return "gmv";
    case Framework::gmvc: return "gmvc";
    case Framework::one_over_n: return "1/n";
  }
  return "?";
}

Framework parse_framework(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "mv") return Framework::mv;
  if (s == "mvc") return Framework::mvc;
  if (s == "gmv") return Framework::gmv;
  if (s == "gmvc") return Framework::gmvc;
  if (s == "1/n" || s == "one_over_n" || s == "equal") return Framework::one_over_n;
  throw std::invalid_argument("unknown framework '" + std::string(text) + "'");
}

WeightVector::WeightVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("WeightVector: empty");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < -kTolerance || v > 1.0 + kTolerance) {
      throw std::invalid_argument("WeightVector: entry " + std::to_string(i) + " = " +
                                  std::to_string(v) + " outside [0, 1]");
    }
  }
  if (std::abs(values_.sum() - 1.0) > kTolerance) {
    throw std::invalid_argument("WeightVector: weights sum to " + std::to_string(values_.sum()));
  }
}

WeightVector WeightVector::equal(Eigen::Index n) {
  if (n <= 0) throw std::invalid_argument("WeightVector::equal: n must be positive");
  return WeightVector(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

namespace {

void check_inputs(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma) {
  const Eigen::Index n = sigma.rows();
  if (n == 0 || sigma.cols() != n) throw std::invalid_argument("covariance must be square and non-empty");
  if (mu.size() != n) throw std::invalid_argument("mean and covariance sizes differ");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
  if (!mu.allFinite() || !sigma.allFinite()) throw std::invalid_argument("non-finite moment input");
}

QpOptions qp_options(const SolverOptions& options, Eigen::Index assets) {
  QpOptions q;
  q.kkt_tolerance = options.kkt_tolerance;
  q.feasibility_tolerance = options.feasibility_tolerance;
  q.max_iterations = options.max_iterations > 0
                         ? options.max_iterations
                         : static_cast<int>(std::max<Eigen::Index>(10 * assets * assets, 10));
  return q;
}

std::vector<Eigen::Index> zero_weights(const Eigen::VectorXd& w, const std::vector<Eigen::Index>& ws,
                                       Eigen::Index n) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i : ws) {
    if (i < n && w[i] == 0.0) out.push_back(i);
  }
  return out;
}

bool on_simplex(const Eigen::VectorXd& w) {
  return w.size() > 0 && w.allFinite() && w.minCoeff() >= 0.0 && std::abs(w.sum() - 1.0) <= 1e-12;
}

SolveReport solve_plain(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                        const SolverOptions& options) {
  check_inputs(mu, sigma, gamma);
  const Eigen::Index n = sigma.rows();
  QuadraticProgram qp;
  qp.hessian = gamma * sigma;
  qp.linear = -mu;
  qp.eq_matrix = Eigen::MatrixXd::Ones(1, n);
  qp.eq_rhs = Eigen::VectorXd::Ones(1);
  qp.nonnegative.assign(static_cast<std::size_t>(n), options.long_only);
  const QpSolution s =
      solve_qp(qp, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), qp_options(options, n));
  SolveReport r;
  r.weights = s.x;
  if (options.long_only) r.weights = r.weights.cwiseMax(0.0);
  r.objective = s.objective;
  r.kkt_residual = s.kkt_residual;
  r.iterations = s.iterations;
  r.active_set = zero_weights(s.x, s.working_set, n);
  r.turnover_subgradient = Eigen::VectorXd::Zero(n);
  return r;
}

SolveReport solve_penalized(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                            double beta, const Eigen::VectorXd& w_prev, const SolverOptions& options) {
  check_inputs(mu, sigma, gamma);
  const Eigen::Index n = sigma.rows();
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be non-negative");
  if (w_prev.size() != n || !w_prev.allFinite()) throw std::invalid_argument("pre-trade weights have the wrong size");

  // Variables [w, u, v] with w - u + v = w_prev, so u and v are the buy and
  // sell legs of the trade.
  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  qp.hessian.topLeftCorner(n, n) = gamma * sigma;
  qp.linear.resize(3 * n);
  qp.linear << -mu, Eigen::VectorXd::Constant(n, beta), Eigen::VectorXd::Constant(n, beta);
  qp.eq_matrix = Eigen::MatrixXd::Zero(n + 1, 3 * n);
  qp.eq_matrix.block(0, 0, 1, n).setOnes();
  qp.eq_matrix.block(1, 0, n, n).setIdentity();
  qp.eq_matrix.block(1, n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  qp.eq_matrix.block(1, 2 * n, n, n).setIdentity();
  qp.eq_rhs.resize(n + 1);
  qp.eq_rhs << 1.0, w_prev;
  qp.nonnegative.assign(static_cast<std::size_t>(3 * n), true);
  if (!options.long_only) {
    std::fill(qp.nonnegative.begin(), qp.nonnegative.begin() + n, false);
  }

  const Eigen::VectorXd w0 =
      on_simplex(w_prev) ? w_prev : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd x0(3 * n);
  x0 << w0, (w0 - w_prev).cwiseMax(0.0), (w_prev - w0).cwiseMax(0.0);

  const QpSolution s = solve_qp(qp, x0, qp_options(options, n));
  SolveReport r;
  r.weights = s.x.head(n);
  if (options.long_only) r.weights = r.weights.cwiseMax(0.0);
  r.objective = portfolio_objective(mu, sigma, gamma, beta, w_prev, r.weights);
  r.kkt_residual = s.kkt_residual;
  r.iterations = s.iterations;
  r.active_set = zero_weights(s.x, s.working_set, n);
  if (beta > 0.0) {
    r.turnover_subgradient = -s.eq_multipliers.tail(n) / beta;
  } else {
    r.turnover_subgradient = Eigen::VectorXd::Zero(n);
  }
  return r;
}

}  // namespace

SolveReport solve_mv(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                     const SolverOptions& options) {
  return solve_plain(mu, sigma, gamma, options);
}

SolveReport solve_mvc(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                      double beta, const Eigen::VectorXd& w_prev, const SolverOptions& options) {
  return solve_penalized(mu, sigma, gamma, beta, w_prev, options);
}

SolveReport solve_gmv(const Eigen::MatrixXd& sigma, double gamma, const SolverOptions& options) {
  return solve_plain(Eigen::VectorXd::Zero(sigma.rows()), sigma, gamma, options);
}

SolveReport solve_gmvc(const Eigen::MatrixXd& sigma, double gamma, double beta,
                       const Eigen::VectorXd& w_prev, const SolverOptions& options) {
  return solve_penalized(Eigen::VectorXd::Zero(sigma.rows()), sigma, gamma, beta, w_prev, options);
}

double portfolio_objective(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                           double beta, const Eigen::VectorXd& w_prev, const Eigen::VectorXd& w) {
  double value = 0.5 * gamma * w.dot(sigma * w) - mu.dot(w);
  if (beta != 0.0) value += beta * (w - w_prev).lpNorm<1>();
  return value;
}

Eigen::VectorXd closed_form_mv(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma) {
  check_inputs(mu, sigma, gamma);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("closed_form_mv: covariance is not positive definite");
  }
  const Eigen::Index n = sigma.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd si_mu = llt.solve(mu);
  const Eigen::VectorXd si_l = llt.solve(ones);
  const double lsl = ones.dot(si_l);
  const Eigen::VectorXd speculative = (si_mu - si_l * (ones.dot(si_mu) / lsl)) / gamma;
  return speculative + si_l / lsl;
}

Eigen::VectorXd shifted_mean(const Eigen::VectorXd& mu, double beta, const Eigen::VectorXd& g_star) {
  if (g_star.size() != mu.size()) throw std::invalid_argument("shifted_mean: size mismatch");
  return mu - beta * g_star;
}

Eigen::MatrixXd shifted_covariance(const Eigen::MatrixXd& sigma, double beta, double gamma,
                                   const Eigen::VectorXd& g_star) {
  if (g_star.size() != sigma.rows()) throw std::invalid_argument("shifted_covariance: size mismatch");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sigma.rows());
  return sigma + (beta / gamma) * (g_star * ones.transpose() + ones * g_star.transpose());
}

Eigen::VectorXd subgradient_at(const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev,
                               double tolerance, const Eigen::VectorXd& kkt_subgradient) {
  const Eigen::Index n = w.size();
  if (w_prev.size() != n || kkt_subgradient.size() != n) {
    throw std::invalid_argument("subgradient_at: size mismatch");
  }
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double trade = w[i] - w_prev[i];
    if (trade > tolerance) {
      g[i] = 1.0;
    } else if (trade < -tolerance) {
      g[i] = -1.0;
    } else {
      const double k = kkt_subgradient[i];
      if (!std::isfinite(k) || std::abs(k) > 1.0 + 1e-6) {
        throw SolverError("subgradient entry " + std::to_string(i) + " = " + std::to_string(k) +
                          " outside [-1, 1]");
      }
      g[i] = std::clamp(k, -1.0, 1.0);
    }
  }
  return g;
}

double simplex_kkt_residual(const Eigen::VectorXd& gradient, const Eigen::VectorXd& w,
                            double active_tolerance) {
  const Eigen::Index n = w.size();
  if (gradient.size() != n) throw std::invalid_argument("simplex_kkt_residual: size mismatch");
  double lambda = 0.0;
  int free_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] > active_tolerance) {
      lambda += gradient[i];
      ++free_count;
    }
  }
  if (free_count > 0) lambda /= free_count;
  double residual = std::abs(w.sum() - 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = gradient[i] - lambda;
    if (w[i] > active_tolerance) {
      residual = std::max(residual, std::abs(z));
    } else {
      residual = std::max({residual, -z, -w[i]});
    }
  }
  return residual;
}

}  // namespace cryptofolio::optimizers
