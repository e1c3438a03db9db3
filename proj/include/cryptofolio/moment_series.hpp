#pragma once

#include "cryptofolio/estimators.hpp"
#include "cryptofolio/parallel.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cryptofolio::estimators {

/// Out-of-sample geometry: step s in [0, test_rows) forecasts return row
/// train_rows + s using only rows before it.
struct TestRange {
  Eigen::Index train_rows = 0;
  Eigen::Index test_rows = 0;
};

/// Sample moments over the trailing `window` rows before each target row.
std::vector<MomentEstimate> rolling_sample_estimates(const Eigen::MatrixXd& returns,
                                                     TestRange range, int window,
                                                     Exec exec = Exec::parallel);

/// Same series built with one RollingMoments add/drop per step. Used as a
/// cross-check of the windowed kernel.
std::vector<MomentEstimate> rolling_sample_estimates_streaming(const Eigen::MatrixXd& returns,
                                                               TestRange range, int window);

struct DccEgarchOptions {
  /// Parameters are re-estimated every `refit_stride` steps; in between the
  /// latest parameters are re-filtered over the current window.
  int refit_stride = 1;
  /// Fit on every row before the target (true) or on the trailing
  /// `train_rows` rows only (false).
  bool expanding = true;
  EgarchFitOptions egarch;
  DccFitOptions dcc;
};

/// Parameters estimated at one refit step.
struct DccEgarchFit {
  Eigen::Index step = 0;
  std::vector<EgarchFit> egarch;
  DccFit dcc;
};

struct DccEgarchSeries {
  std::vector<MomentEstimate> estimates;
  /// One-step correlation forecast behind each estimate.
  std::vector<Eigen::MatrixXd> correlations;
  std::vector<DccEgarchFit> fits;
};

/// DCC-EGARCH forecasts from the rows before each target (see
/// DccEgarchOptions::expanding); the estimate mean is the fitted random-walk
/// drift.
DccEgarchSeries rolling_dcc_egarch(const Eigen::MatrixXd& returns, TestRange range,
                                   const DccEgarchOptions& options, Exec exec = Exec::parallel);

/// One-step forecast for the window ending just before the target row, using
/// already-fitted parameters.
MomentEstimate dcc_egarch_forecast(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                   const DccEgarchFit& fit, Eigen::Index target_index,
                                   Eigen::MatrixXd* correlation = nullptr);

/// Fits EGARCH per asset and DCC on the standardized residuals of a window.
DccEgarchFit fit_dcc_egarch(const Eigen::Ref<const Eigen::MatrixXd>& window,
                            const DccEgarchOptions& options);

}  // namespace cryptofolio::estimators
