#include "cryptofolio/moment_series.hpp"

#include <stdexcept>

namespace cryptofolio::estimators {

namespace {

void check_range(const Eigen::MatrixXd& returns, TestRange range, Eigen::Index lookback) {
  if (range.test_rows < 1 || range.train_rows + range.test_rows > returns.rows()) {
    throw std::invalid_argument("rolling estimates: test range outside the panel");
  }
  if (lookback < 2 || lookback > range.train_rows) {
    throw std::invalid_argument("rolling estimates: lookback must lie in [2, train rows]");
  }
}

double window_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size());
}

}  // namespace

std::vector<MomentEstimate> rolling_sample_estimates(const Eigen::MatrixXd& returns,
                                                     TestRange range, int window, Exec exec) {
  check_range(returns, range, window);
  std::vector<MomentEstimate> out(static_cast<std::size_t>(range.test_rows));
  parallel_for(out.size(), exec, [&](std::size_t s) {
    const Eigen::Index target = range.train_rows + static_cast<Eigen::Index>(s);
    const SampleMoments m = sample_moments(returns.middleRows(target - window, window));
    out[s] = MomentEstimate(target, m.mean, m.cov);
  });
  return out;
}

std::vector<MomentEstimate> rolling_sample_estimates_streaming(const Eigen::MatrixXd& returns,
                                                               TestRange range, int window) {
  check_range(returns, range, window);
  RollingMoments acc(returns.cols());
  const Eigen::Index first_target = range.train_rows;
  for (Eigen::Index t = first_target - window; t < first_target; ++t) {
    acc.add(returns.row(t).transpose());
  }
  std::vector<MomentEstimate> out;
  out.reserve(static_cast<std::size_t>(range.test_rows));
  for (Eigen::Index s = 0; s < range.test_rows; ++s) {
    const Eigen::Index target = first_target + s;
    if (s > 0) {
      acc.add(returns.row(target - 1).transpose());
      acc.drop(returns.row(target - 1 - window).transpose());
    }
    const SampleMoments m = acc.moments();
    out.emplace_back(target, m.mean, m.cov);
  }
  return out;
}

DccEgarchFit fit_dcc_egarch(const Eigen::Ref<const Eigen::MatrixXd>& window,
                            const DccEgarchOptions& options) {
  const Eigen::Index n = window.cols();
  DccEgarchFit fit;
  Eigen::MatrixXd residuals(window.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd col = window.col(i);
    fit.egarch.push_back(fit_egarch(col, options.egarch));
    residuals.col(i) = egarch_filter(col, fit.egarch.back().params, fit.egarch.back().initial_variance)
                           .residuals;
  }
  if (n >= 2) {
    fit.dcc = fit_dcc(residuals, options.dcc);
  } else {
    fit.dcc.params = DccParams{0.0, 0.0, Eigen::MatrixXd::Ones(1, 1)};
    fit.dcc.restricted = true;
  }
  return fit;
}

MomentEstimate dcc_egarch_forecast(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                   const DccEgarchFit& fit, Eigen::Index target_index,
                                   Eigen::MatrixXd* correlation) {
  const Eigen::Index n = window.cols();
  Eigen::MatrixXd residuals(window.rows(), n);
  Eigen::VectorXd next_variance(n);
  Eigen::VectorXd drift(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd col = window.col(i);
    const EgarchParams& p = fit.egarch[static_cast<std::size_t>(i)].params;
    const EgarchPath path = egarch_filter(col, p, window_variance(col));
    residuals.col(i) = path.residuals;
    next_variance[i] = path.variance[path.variance.size() - 1];
    drift[i] = p.mu;
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  if (n >= 2) r = dcc_next_correlation(dcc_filter(residuals, fit.dcc.params), fit.dcc.params);
  if (correlation) *correlation = r;
  return MomentEstimate(target_index, drift, dcc_covariance(r, next_variance));
}

DccEgarchSeries rolling_dcc_egarch(const Eigen::MatrixXd& returns, TestRange range,
                                   const DccEgarchOptions& options, Exec exec) {
  const Eigen::Index lookback = range.train_rows;
  check_range(returns, range, lookback);
  if (options.refit_stride < 1) throw std::invalid_argument("refit stride must be positive");
  const Eigen::Index stride = options.refit_stride;
  const Eigen::Index q = range.test_rows;
  const std::size_t refits = static_cast<std::size_t>((q + stride - 1) / stride);

  DccEgarchSeries out;
  out.fits.resize(refits);
  parallel_for(refits, exec, [&](std::size_t k) {
    const Eigen::Index step = static_cast<Eigen::Index>(k) * stride;
    const Eigen::Index target = range.train_rows + step;
    const Eigen::Index first = options.expanding ? 0 : target - lookback;
    out.fits[k] = fit_dcc_egarch(returns.middleRows(first, target - first), options);
    out.fits[k].step = step;
  });

  out.estimates.resize(static_cast<std::size_t>(q));
  out.correlations.resize(static_cast<std::size_t>(q));
  parallel_for(static_cast<std::size_t>(q), exec, [&](std::size_t s) {
    const Eigen::Index step = static_cast<Eigen::Index>(s);
    const Eigen::Index target = range.train_rows + step;
    const DccEgarchFit& fit = out.fits[static_cast<std::size_t>(step / stride)];
    const Eigen::Index first = options.expanding ? 0 : target - lookback;
    out.estimates[s] = dcc_egarch_forecast(returns.middleRows(first, target - first), fit,
                                           target, &out.correlations[s]);
  });
  return out;
}

}  // namespace cryptofolio::estimators
