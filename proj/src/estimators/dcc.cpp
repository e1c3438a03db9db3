#include "cryptofolio/estimators.hpp"
#include "cryptofolio/minimize.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cryptofolio::estimators {

namespace {

constexpr double kPersistenceCap = 0.9999;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

DccParams params_from_free(const Eigen::VectorXd& x, const Eigen::MatrixXd& qbar) {
  const double persistence = kPersistenceCap * logistic(x[0]);
  const double share = logistic(x[1]);
  return DccParams{persistence * share, persistence * (1.0 - share), qbar};
}

}  // namespace

void DccParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("DCC: a and b must be non-negative");
  if (!(a + b < 1.0)) throw std::invalid_argument("DCC: a + b must be < 1");
  if (qbar.rows() != qbar.cols() || qbar.rows() == 0) {
    throw std::invalid_argument("DCC: qbar must be square and non-empty");
  }
  if ((qbar - qbar.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qbar.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("DCC: qbar not symmetric");
  }
  if (!(qbar.diagonal().minCoeff() > 0.0)) {
    throw std::invalid_argument("DCC: qbar diagonal must be positive");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qbar, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * qbar.diagonal().maxCoeff()) {
    throw std::invalid_argument("DCC: qbar not PSD");
  }
}

Eigen::MatrixXd correlation_from_q(const Eigen::MatrixXd& q) {
  const Eigen::VectorXd inv_sd = q.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = inv_sd.asDiagonal() * q * inv_sd.asDiagonal();
  r = 0.5 * (r + r.transpose());
  r.diagonal().setOnes();
  return r;
}

DccState dcc_filter(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccParams& params,
                    std::vector<Eigen::MatrixXd>* correlations) {
  const Eigen::Index n = residuals.cols();
  if (params.qbar.rows() != n) throw std::invalid_argument("dcc_filter: dimension mismatch");
  const double c = 1.0 - params.a - params.b;
  DccState state;
  state.q = params.qbar;
  state.last_shock = Eigen::VectorXd::Zero(n);
  if (correlations) correlations->clear();
  for (Eigen::Index t = 0; t < residuals.rows(); ++t) {
    if (t > 0) {
      state.q = c * params.qbar + params.a * state.last_shock * state.last_shock.transpose() +
                params.b * state.q;
    }
    if (correlations) correlations->push_back(correlation_from_q(state.q));
    state.last_shock = residuals.row(t).transpose();
  }
  return state;
}

double dcc_loglik(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccParams& params) {
  const Eigen::Index n = residuals.cols();
  const double c = 1.0 - params.a - params.b;
  Eigen::MatrixXd q = params.qbar;
  double total = 0.0;
  for (Eigen::Index t = 0; t < residuals.rows(); ++t) {
    const Eigen::VectorXd v = residuals.row(t).transpose();
    if (t > 0) {
      const Eigen::VectorXd prev = residuals.row(t - 1).transpose();
      q = c * params.qbar + params.a * prev * prev.transpose() + params.b * q;
    }
    const Eigen::MatrixXd r = correlation_from_q(q);
    const Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::MatrixXd& l = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
    const Eigen::VectorXd y = llt.matrixL().solve(v);
    total += -0.5 * (log_det + y.squaredNorm() - v.squaredNorm());
  }
  return total;
}

DccFit fit_dcc(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccFitOptions& options) {
  const Eigen::Index n = residuals.cols();
  const Eigen::Index rows = residuals.rows();
  if (n < 2) throw std::invalid_argument("fit_dcc: correlation needs at least 2 assets");
  if (rows < 10) throw std::invalid_argument("fit_dcc: need at least 10 observations");
  if (!residuals.allFinite()) throw std::invalid_argument("fit_dcc: non-finite residuals");

  const Eigen::MatrixXd data = residuals;
  const Eigen::MatrixXd qbar = (data.transpose() * data) / static_cast<double>(rows);
  DccParams restricted{0.0, 0.0, 0.5 * (qbar + qbar.transpose())};
  restricted.validate();

  auto objective = [&](const Eigen::VectorXd& x) {
    const double ll = dcc_loglik(data, params_from_free(x, restricted.qbar));
    return std::isfinite(ll) ? -ll / static_cast<double>(rows)
                             : std::numeric_limits<double>::quiet_NaN();
  };
  Eigen::VectorXd x0(2);
  x0 << logit(0.95 / kPersistenceCap), logit(0.05 / 0.95);

  MinimizeOptions mopt;
  mopt.max_iterations = options.max_iterations;
  mopt.step_tolerance = options.step_tolerance;
  const MinimizeResult res = minimize_bfgs(objective, x0, mopt);

  DccFit fit;
  fit.params = params_from_free(res.x, restricted.qbar);
  fit.loglik = -res.value * static_cast<double>(rows);
  fit.restricted_loglik = dcc_loglik(data, restricted);
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.boundary = fit.params.a + fit.params.b > 1.0 - 1e-3;
  if (fit.restricted_loglik >= fit.loglik ||
      2.0 * (fit.loglik - fit.restricted_loglik) < options.lr_critical_value) {
    fit.restricted = true;
    fit.params = restricted;
    fit.loglik = fit.restricted_loglik;
    fit.boundary = false;
  }
  return fit;
}

Eigen::MatrixXd dcc_next_correlation(const DccState& state, const DccParams& params) {
  const Eigen::MatrixXd q = (1.0 - params.a - params.b) * params.qbar +
                            params.a * state.last_shock * state.last_shock.transpose() +
                            params.b * state.q;
  return correlation_from_q(q);
}

Eigen::MatrixXd dcc_covariance(const Eigen::MatrixXd& correlation, const Eigen::VectorXd& variances) {
  if (correlation.rows() != variances.size()) {
    throw std::invalid_argument("dcc_covariance: dimension mismatch");
  }
  if (!(variances.minCoeff() > 0.0)) throw std::invalid_argument("dcc_covariance: non-positive variance");
  const Eigen::VectorXd sd = variances.cwiseSqrt();
  Eigen::MatrixXd cov = sd.asDiagonal() * correlation * sd.asDiagonal();
  return 0.5 * (cov + cov.transpose());
}

}  // namespace cryptofolio::estimators
