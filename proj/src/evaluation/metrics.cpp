#include "cryptofolio/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace cryptofolio::evaluation {

AggregateMetrics aggregate_metrics(std::span<const backtest::BacktestLedger> ledgers,
                                   const MetricsConvention& convention) {
  if (ledgers.empty()) throw std::invalid_argument("aggregate_metrics: no ledgers");
  const std::size_t q = ledgers.front().steps.size();
  const double ret_shift = convention.returns == Summand::one_plus ? 1.0 : 0.0;
  const double risk_shift = convention.risk == Summand::one_plus ? 1.0 : 0.0;
  AggregateMetrics m;
  for (const auto& ledger : ledgers) {
    if (ledger.steps.size() != q) {
      throw std::invalid_argument("aggregate_metrics: ledger '" + ledger.spec.label + "' has " +
                                  std::to_string(ledger.steps.size()) + " steps, expected " +
                                  std::to_string(q));
    }
    for (const auto& s : ledger.steps) {
      m.net_return += ret_shift + s.net_return;
      const double r = risk_shift + s.net_return;
      m.risk += r * r;
      m.gross_return += s.gross_return;
      m.costs += s.cost;
    }
  }
  const double g = static_cast<double>(ledgers.size());
  m.net_return /= g;
  m.risk /= g;
  m.gross_return /= g;
  m.costs /= g;
  return m;
}

double aggregate_rmse(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals) {
  if (forecasts.rows() != actuals.rows() || forecasts.cols() != actuals.cols()) {
    throw std::invalid_argument("aggregate_rmse: shape mismatch");
  }
  if (forecasts.size() == 0) throw std::invalid_argument("aggregate_rmse: empty input");
  return std::sqrt((forecasts - actuals).squaredNorm() / static_cast<double>(forecasts.size()));
}

double variation_level_mean(const Eigen::MatrixXd& series) {
  if (series.rows() < 2) throw std::invalid_argument("variation level needs at least two steps");
  double total = 0.0;
  for (Eigen::Index t = 1; t < series.rows(); ++t) total += (series.row(t) - series.row(t - 1)).norm();
  return total / static_cast<double>(series.rows() - 1);
}

double variation_level_cov(std::span<const Eigen::MatrixXd> series) {
  if (series.size() < 2) throw std::invalid_argument("variation level needs at least two steps");
  double total = 0.0;
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (series[t].rows() != series[t - 1].rows() || series[t].cols() != series[t - 1].cols()) {
      throw std::invalid_argument("variation_level_cov: shape mismatch at step " + std::to_string(t));
    }
    total += (series[t] - series[t - 1]).norm();
  }
  return total / static_cast<double>(series.size() - 1);
}

}  // namespace cryptofolio::evaluation
