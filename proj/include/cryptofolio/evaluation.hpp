#pragma once

#include "cryptofolio/backtest.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cryptofolio::evaluation {

struct FeeResult {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double b = 0.0;
  double c = 0.0;
  double discriminant = 0.0;  // B^2 + 4C
  /// False when the discriminant is negative; phi1/phi2 are then NaN.
  bool real = true;
};

/// Fee equating the average quadratic utility of a strategy (gross factors
/// R* = 1 + net return) with that of the benchmark (R). Both roots are
/// returned; the economically meaningful fee is phi2.
FeeResult performance_fee(std::span<const double> strategy, std::span<const double> benchmark,
                          double gamma);

/// Gross factors 1 + net return of a ledger.
std::vector<double> gross_factors(const backtest::BacktestLedger& ledger);

/// Excess average utility of the strategy charged `fee` over the benchmark,
/// scaled so that it equals -fee^2 + B fee + C.
double utility_gap(std::span<const double> strategy, std::span<const double> benchmark, double gamma,
                   double fee);

/// (1/G) sum kappa phi2 over the per-gamma fees; empty if any fee is undefined.
std::optional<double> average_annualized_pf(std::span<const FeeResult> fees, double kappa);

/// Per-period summand used when totalling returns: r or 1 + r.
enum class Summand { net, one_plus };

struct MetricsConvention {
  Summand returns = Summand::net;
  /// Squared summand in the risk total: r^2 by default.
  Summand risk = Summand::net;
};

struct AggregateMetrics {
  double net_return = 0.0;
  double risk = 0.0;
  double gross_return = 0.0;
  double costs = 0.0;
};

/// Averages over the ledgers (one per gamma) of the per-ledger totals.
AggregateMetrics aggregate_metrics(std::span<const backtest::BacktestLedger> ledgers,
                                   const MetricsConvention& convention = {});

/// sqrt(sum (r - r_hat)^2 / (N Q)).
double aggregate_rmse(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals);

/// Mean L2 norm of consecutive row differences (rows are time steps).
double variation_level_mean(const Eigen::MatrixXd& series);

/// Mean Frobenius norm of consecutive matrix differences.
double variation_level_cov(std::span<const Eigen::MatrixXd> series);

// ---------------------------------------------------------------------------
// Report assembly.
// ---------------------------------------------------------------------------

struct StrategyResult {
  std::string label;
  std::vector<double> gammas;
  std::vector<FeeResult> fees;
  /// Annualized average fee; empty when any per-gamma fee is undefined.
  std::optional<double> average_fee;
  AggregateMetrics metrics;
  /// average_fee > 0.
  bool positive = false;
};

struct PerformanceReport {
  std::string frequency;
  double kappa = 0.0;
  std::size_t test_rows = 0;
  AggregateMetrics benchmark;
  /// Strategies in presentation order.
  std::vector<StrategyResult> strategies;

  bool operator==(const PerformanceReport&) const;
};

struct StrategyLedgers {
  std::string label;
  /// One ledger per gamma, ascending gamma.
  std::vector<backtest::BacktestLedger> ledgers;
};

/// Fees and metrics of every strategy against the benchmark ledger. Throws
/// when a ledger's length differs from the benchmark's.
PerformanceReport build_report(const std::string& frequency,
                               const std::vector<StrategyLedgers>& strategies,
                               const backtest::BacktestLedger& benchmark, double kappa,
                               const MetricsConvention& convention = {});

std::string report_to_json(const PerformanceReport& report);
PerformanceReport report_from_json(const std::string& text);

/// Panels A-D (net return, risk, gross return, costs) as CSV, benchmark first.
std::string metrics_csv(const PerformanceReport& report);
/// Average annualized fee per strategy plus the per-gamma phi2 values.
std::string fees_csv(const PerformanceReport& report);
/// Aligned text rendering of both tables.
std::string render_text(const PerformanceReport& report);

}  // namespace cryptofolio::evaluation
