#pragma once

#include "cryptofolio/date.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace cryptofolio::estimators {

/// One-step-ahead conditional mean and covariance for the return row at
/// `target_index`. Construction enforces finite means and a symmetric PSD
/// covariance: eigenvalues in (-1e-10, 0) are clipped to zero and the matrix
/// rebuilt, anything more negative is rejected.
class MomentEstimate {
 public:
  static constexpr double kSymmetryTolerance = 1e-10;
  static constexpr double kPsdTolerance = 1e-10;

  MomentEstimate() = default;
  MomentEstimate(Eigen::Index target_index, Eigen::VectorXd mean, Eigen::MatrixXd cov);

  Eigen::Index target_index() const noexcept { return target_index_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  /// True when a small negative eigenvalue was clipped during construction.
  bool repaired() const noexcept { return repaired_; }

 private:
  Eigen::Index target_index_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  bool repaired_ = false;
};

struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Window mean and covariance with divisor M (the window length).
SampleMoments sample_moments(const Eigen::Ref<const Eigen::MatrixXd>& window);

/// Streaming window statistics: maintains the row sum and the sum of outer
/// products so that a shifted window costs one add and one drop.
class RollingMoments {
 public:
  explicit RollingMoments(Eigen::Index assets);

  void add(const Eigen::Ref<const Eigen::VectorXd>& row);
  void drop(const Eigen::Ref<const Eigen::VectorXd>& row);
  Eigen::Index count() const noexcept { return count_; }
  SampleMoments moments() const;

 private:
  Eigen::Index count_ = 0;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd outer_;
};

// ---------------------------------------------------------------------------
// EGARCH(1,1) with Student-t innovations.
// ---------------------------------------------------------------------------

struct EgarchParams {
  double mu = 0.0;      // drift of the random-walk mean equation
  double omega = 0.0;
  double alpha1 = 0.0;  // loading on the signed standardized shock
  double alpha2 = 0.0;  // loading on the absolute standardized shock
  double beta1 = 0.0;   // log-variance persistence
  double nu = 8.0;      // Student-t degrees of freedom

  /// Throws unless |beta1| < 1 and nu > 2.
  void validate() const;
};

struct EgarchPath {
  /// variance[t] is the conditional variance of observation t; the final
  /// element (index T) is the one-step-ahead forecast.
  Eigen::VectorXd variance;
  /// Standardized residuals (r_t - mu) / sqrt(variance[t]), length T.
  Eigen::VectorXd residuals;
  /// Number of steps where ln h left [-kLogVarianceBound, kLogVarianceBound].
  int clamp_events = 0;
};

inline constexpr double kLogVarianceBound = 50.0;

/// Runs ln h_t = omega + a1 z_{t-1} + a2 |z_{t-1}| + b1 ln h_{t-1} from
/// h_0 = initial_variance.
EgarchPath egarch_filter(const Eigen::Ref<const Eigen::VectorXd>& series,
                         const EgarchParams& params, double initial_variance);

/// Average Student-t log-likelihood per observation of the filtered path.
double egarch_loglik(const Eigen::Ref<const Eigen::VectorXd>& series,
                     const EgarchParams& params, double initial_variance);

struct EgarchFit {
  EgarchParams params;
  double loglik = 0.0;          // total log-likelihood at params
  double initial_loglik = 0.0;  // total log-likelihood at the starting point
  double initial_variance = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Asymptotic standard errors from the numeric Hessian, order
  /// (mu, omega, alpha1, alpha2, beta1, nu); +inf when not invertible.
  Eigen::VectorXd std_errors;
  /// Both shock loadings are statistically indistinguishable from zero.
  bool weak_dynamics = false;
};

struct EgarchFitOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-7;
  bool compute_std_errors = true;
};

/// Default starting point: mu = sample mean, omega = ln(var)(1 - 0.9),
/// alpha1 = 0, alpha2 = 0.1, beta1 = 0.9, nu = 8.
EgarchParams egarch_default_start(const Eigen::Ref<const Eigen::VectorXd>& series);

/// Maximum likelihood fit. Requires at least 100 observations and a
/// non-constant series. Non-convergence is flagged, not thrown.
EgarchFit fit_egarch(const Eigen::Ref<const Eigen::VectorXd>& series,
                     const EgarchFitOptions& options = {});
EgarchFit fit_egarch(const Eigen::Ref<const Eigen::VectorXd>& series, const EgarchParams& start,
                     const EgarchFitOptions& options = {});

// ---------------------------------------------------------------------------
// DCC(1,1) with correlation targeting.
// ---------------------------------------------------------------------------

struct DccParams {
  double a = 0.0;
  double b = 0.0;
  Eigen::MatrixXd qbar;

  /// Throws unless a, b >= 0, a + b < 1 and qbar is symmetric PSD with a
  /// positive diagonal.
  void validate() const;
};

struct DccFit {
  DccParams params;
  double loglik = 0.0;             // Gaussian correlation quasi-likelihood
  double restricted_loglik = 0.0;  // same at a = b = 0
  int iterations = 0;
  bool converged = false;
  /// a + b ended within 1e-3 of the stationarity boundary.
  bool boundary = false;
  /// The likelihood-ratio check could not distinguish the fit from constant
  /// correlation, so a = b = 0 was reported.
  bool restricted = false;
};

struct DccFitOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-7;
  /// chi-square(2) 95% critical value used by the constant-correlation check.
  double lr_critical_value = 5.991464547107979;
};

/// Filtered correlation state after the last observation.
struct DccState {
  Eigen::MatrixXd q;           // Q_T
  Eigen::VectorXd last_shock;  // v_T
};

/// Runs the Q recursion from Q_0 = qbar over `residuals` and returns the
/// state after the final row. If `correlations` is given it receives every
/// in-sample R_t (t = 0..T-1).
DccState dcc_filter(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccParams& params,
                    std::vector<Eigen::MatrixXd>* correlations = nullptr);

/// Total Gaussian correlation quasi-log-likelihood
/// -1/2 sum(log|R_t| + v_t' R_t^-1 v_t - v_t' v_t).
double dcc_loglik(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccParams& params);

/// Second-stage QMLE over (a, b) with qbar = (1/T) sum v_t v_t'.
DccFit fit_dcc(const Eigen::Ref<const Eigen::MatrixXd>& residuals, const DccFitOptions& options = {});

/// Normalizes Q to a correlation matrix with an exact unit diagonal.
Eigen::MatrixXd correlation_from_q(const Eigen::MatrixXd& q);

/// One-step correlation R_{T+1|T} from a filtered state.
Eigen::MatrixXd dcc_next_correlation(const DccState& state, const DccParams& params);

/// Sigma = D R D with D = diag(sqrt(variances)).
Eigen::MatrixXd dcc_covariance(const Eigen::MatrixXd& correlation, const Eigen::VectorXd& variances);

// ---------------------------------------------------------------------------
// External and baseline mean forecasts.
// ---------------------------------------------------------------------------

struct ForecastSeries {
  std::vector<Date> dates;
  Eigen::MatrixXd means;  // Q x N, aligned to `dates`
  std::string source;
  /// Rows present in the file but not among the requested dates.
  std::size_t dropped_rows = 0;
};

/// Loads `date,<asset1>,...` forecasts and inner-joins them onto `test_dates`.
/// Every test date must be present; extra file rows are dropped and counted.
ForecastSeries load_forecasts(const std::filesystem::path& path,
                              const std::vector<Date>& test_dates,
                              const std::vector<std::string>& asset_ids,
                              const std::string& source = "external");

enum class BaselineKind { zero, rolling_mean };

Eigen::VectorXd baseline_forecast(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                  BaselineKind kind, Eigen::Index assets);

}  // namespace cryptofolio::estimators
