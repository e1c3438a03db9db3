#include "cryptofolio/estimators.hpp"
#include "cryptofolio/minimize.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cryptofolio::estimators {

namespace {

constexpr double kNuMin = 2.01;
constexpr double kNuSpan = 197.99;  // nu in (2.01, 200)
constexpr double kBetaScale = 0.9999;

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const double mean = series.mean();
  return (series.array() - mean).square().sum() / static_cast<double>(series.size());
}

// Mapping between constrained parameters and the unconstrained BFGS vector.
struct Transform {
  double mean;
  double scale;

  Eigen::VectorXd to_free(const EgarchParams& p) const {
    Eigen::VectorXd x(6);
    const double nu_unit = std::clamp((p.nu - kNuMin) / kNuSpan, 1e-9, 1.0 - 1e-9);
    x << (p.mu - mean) / scale, p.omega, p.alpha1, p.alpha2,
        std::atanh(std::clamp(p.beta1 / kBetaScale, -0.999999, 0.999999)),
        std::log(nu_unit / (1.0 - nu_unit));
    return x;
  }

  EgarchParams from_free(const Eigen::VectorXd& x) const {
    EgarchParams p;
    p.mu = mean + scale * x[0];
    p.omega = x[1];
    p.alpha1 = x[2];
    p.alpha2 = x[3];
    p.beta1 = kBetaScale * std::tanh(x[4]);
    p.nu = kNuMin + kNuSpan / (1.0 + std::exp(-x[5]));
    return p;
  }
};

Eigen::VectorXd as_vector(const EgarchParams& p) {
  Eigen::VectorXd v(6);
  v << p.mu, p.omega, p.alpha1, p.alpha2, p.beta1, p.nu;
  return v;
}

EgarchParams from_vector(const Eigen::VectorXd& v) {
  return EgarchParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

}  // namespace

void EgarchParams::validate() const {
  if (!(std::abs(beta1) < 1.0)) throw std::invalid_argument("EGARCH: |beta1| must be < 1");
  if (!(nu > 2.0)) throw std::invalid_argument("EGARCH: nu must exceed 2");
  if (!std::isfinite(mu) || !std::isfinite(omega) || !std::isfinite(alpha1) ||
      !std::isfinite(alpha2)) {
    throw std::invalid_argument("EGARCH: non-finite parameter");
  }
}

EgarchPath egarch_filter(const Eigen::Ref<const Eigen::VectorXd>& series,
                         const EgarchParams& params, double initial_variance) {
  params.validate();
  if (!(initial_variance > 0.0)) {
    throw std::invalid_argument("egarch_filter: initial variance must be positive");
  }
  const Eigen::Index n = series.size();
  EgarchPath path;
  path.variance.resize(n + 1);
  path.residuals.resize(n);
  double log_h = std::log(initial_variance);
  for (Eigen::Index t = 0; t <= n; ++t) {
    if (log_h > kLogVarianceBound || log_h < -kLogVarianceBound) {
      log_h = std::clamp(log_h, -kLogVarianceBound, kLogVarianceBound);
      ++path.clamp_events;
    }
    const double h = std::exp(log_h);
    path.variance[t] = h;
    if (t == n) break;
    const double z = (series[t] - params.mu) / std::sqrt(h);
    path.residuals[t] = z;
    log_h = params.omega + params.alpha1 * z + params.alpha2 * std::abs(z) + params.beta1 * log_h;
  }
  return path;
}

double egarch_loglik(const Eigen::Ref<const Eigen::VectorXd>& series, const EgarchParams& p,
                     double initial_variance) {
  const EgarchPath path = egarch_filter(series, p, initial_variance);
  const double nu = p.nu;
  const double constant = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(std::numbers::pi * (nu - 2.0));
  double total = 0.0;
  const Eigen::Index n = series.size();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double z = path.residuals[t];
    total += constant - 0.5 * (nu + 1.0) * std::log1p(z * z / (nu - 2.0)) -
             0.5 * std::log(path.variance[t]);
  }
  return total / static_cast<double>(n);
}

EgarchParams egarch_default_start(const Eigen::Ref<const Eigen::VectorXd>& series) {
  EgarchParams p;
  p.mu = series.mean();
  p.omega = std::log(sample_variance(series)) * (1.0 - 0.9);
  p.alpha1 = 0.0;
  p.alpha2 = 0.1;
  p.beta1 = 0.9;
  p.nu = 8.0;
  return p;
}

EgarchFit fit_egarch(const Eigen::Ref<const Eigen::VectorXd>& series,
                     const EgarchFitOptions& options) {
  if (series.size() < 100) throw std::invalid_argument("fit_egarch: need at least 100 observations");
  if (!(series.maxCoeff() > series.minCoeff())) throw std::invalid_argument("fit_egarch: constant series");
  return fit_egarch(series, egarch_default_start(series), options);
}

EgarchFit fit_egarch(const Eigen::Ref<const Eigen::VectorXd>& series, const EgarchParams& start,
                     const EgarchFitOptions& options) {
  if (series.size() < 100) throw std::invalid_argument("fit_egarch: need at least 100 observations");
  const double var0 = sample_variance(series);
  if (!(var0 > 0.0) || !std::isfinite(var0) || !(series.maxCoeff() > series.minCoeff())) {
    throw std::invalid_argument("fit_egarch: constant or non-finite series");
  }
  const Eigen::VectorXd data = series;
  const Transform tf{data.mean(), std::sqrt(var0)};

  auto objective = [&](const Eigen::VectorXd& x) {
    const double ll = egarch_loglik(data, tf.from_free(x), var0);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::quiet_NaN();
  };

  MinimizeOptions mopt;
  mopt.max_iterations = options.max_iterations;
  mopt.step_tolerance = options.step_tolerance;
  const MinimizeResult res = minimize_bfgs(objective, tf.to_free(start), mopt);

  const double n = static_cast<double>(data.size());
  EgarchFit fit;
  fit.params = tf.from_free(res.x);
  fit.loglik = -res.value * n;
  fit.initial_loglik = -res.initial_value * n;
  fit.initial_variance = var0;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.std_errors = Eigen::VectorXd::Constant(6, std::numeric_limits<double>::infinity());

  if (options.compute_std_errors) {
    auto natural_nll = [&](const Eigen::VectorXd& v) {
      const EgarchParams p = from_vector(v);
      if (!(std::abs(p.beta1) < 1.0) || !(p.nu > 2.0)) return std::numeric_limits<double>::quiet_NaN();
      return -egarch_loglik(data, p, var0) * n;
    };
    const Eigen::MatrixXd hess = numeric_hessian(natural_nll, as_vector(fit.params), 1e-4);
    if (hess.allFinite()) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hess + hess.transpose()));
      if (eig.eigenvalues().minCoeff() > 0.0) {
        const Eigen::MatrixXd cov = eig.eigenvectors() *
                                    eig.eigenvalues().cwiseInverse().asDiagonal() *
                                    eig.eigenvectors().transpose();
        fit.std_errors = cov.diagonal().cwiseSqrt();
      }
    }
  }
  fit.weak_dynamics = std::abs(fit.params.alpha1) < 1.96 * fit.std_errors[2] &&
                      std::abs(fit.params.alpha2) < 1.96 * fit.std_errors[3];
  return fit;
}

}  // namespace cryptofolio::estimators
