#pragma once

#include "cryptofolio/date.hpp"
#include "cryptofolio/estimators.hpp"
#include "cryptofolio/market_data.hpp"
#include "cryptofolio/optimizers.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryptofolio::backtest {

enum class MeanSource { sample, external, zero };
enum class CovSource { sample, dcc };

std::string_view to_string(MeanSource m);
std::string_view to_string(CovSource c);
CovSource parse_cov_source(std::string_view text);

struct StrategySpec {
  std::string label;
  optimizers::Framework framework = optimizers::Framework::mv;
  MeanSource mean_source = MeanSource::sample;
  /// Name of the external forecast set when mean_source is external.
  std::string external_name;
  CovSource cov_source = CovSource::sample;
  double gamma = 1.0;
  /// Proportional cost per unit of turnover; also the penalty weight.
  double beta = 0.005;

  /// Throws std::invalid_argument on a non-positive gamma, negative beta or
  /// an external mean without a name.
  void validate() const;
};

struct LedgerStep {
  Eigen::Index row = 0;  // return row realized at this step
  Date date{};
  Eigen::VectorXd target;     // w*_t
  Eigen::VectorXd pre_trade;  // drifted book before rebalancing
  double turnover = 0.0;
  double cost = 0.0;          // beta * turnover
  double gross_return = 0.0;  // simple return of the target book
  double net_return = 0.0;    // (1 - cost)(1 + gross) - 1
  double net_return_approx = 0.0;  // gross - cost
  double wealth = 0.0;        // after this step, W_0 = 1
  int iterations = 0;
  double kkt_residual = 0.0;
};

struct BacktestLedger {
  StrategySpec spec;
  std::vector<std::string> asset_ids;
  std::vector<LedgerStep> steps;

  double total_net_return() const;
  double total_gross_return() const;
  double total_cost() const;
};

/// Backtest failure tied to an out-of-sample step.
class BacktestError : public std::runtime_error {
 public:
  BacktestError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Weights after one period of simple returns: (1 + r_i) w_i / sum_j (1 + r_j) w_j.
optimizers::WeightVector drift_weights(const optimizers::WeightVector& w,
                                       const Eigen::VectorXd& simple_returns);

/// Rolling out-of-sample loop over the test range. `estimates[s]` must target
/// return row train_rows + s. The first pre-trade book is empty, so the first
/// turnover is 1.
BacktestLedger run_backtest(const market_data::ReturnPanel& panel, const StrategySpec& spec,
                            const market_data::Split& split,
                            std::span<const estimators::MomentEstimate> estimates,
                            const optimizers::SolverOptions& options = {});

/// Equal weights restored every period; costs come from the drift back to 1/N.
BacktestLedger one_over_n_rebalanced(const market_data::ReturnPanel& panel,
                                     const market_data::Split& split, double beta);

/// Means from one source paired with covariances from another, step by step.
std::vector<estimators::MomentEstimate> compose_estimates(
    std::span<const estimators::MomentEstimate> covariance_source,
    const std::vector<Eigen::VectorXd>& means);

/// Per-step ledger export at full precision. Weights appear as w_<asset> and
/// pre_<asset> columns.
void write_ledger(const BacktestLedger& ledger, const std::filesystem::path& path);

/// Reads a ledger written by write_ledger; the spec is supplied separately.
BacktestLedger read_ledger(const std::filesystem::path& path, const StrategySpec& spec);

}  // namespace cryptofolio::backtest
