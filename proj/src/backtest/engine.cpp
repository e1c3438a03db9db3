#include "cryptofolio/backtest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <string>

namespace cryptofolio::backtest {

namespace opt = optimizers;

std::string_view to_string(MeanSource m) {
  switch (m) {
    case MeanSource::sample: return "sample";
    case MeanSource::external: return "external";
    case MeanSource::zero: return "zero";
  }
  return "?";
}

std::string_view to_string(CovSource c) { return c == CovSource::sample ? "sample" : "dcc"; }

CovSource parse_cov_source(std::string_view text) {
  if (text == "sample") return CovSource::sample;
  if (text == "dcc" || text == "dcc-egarch") return CovSource::dcc;
  throw std::invalid_argument("unknown covariance source '" + std::string(text) + "'");
}

void StrategySpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument(label + ": gamma must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument(label + ": beta must be non-negative");
  if (mean_source == MeanSource::external && external_name.empty()) {
    throw std::invalid_argument(label + ": external mean source needs a name");
  }
}

double BacktestLedger::total_net_return() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.net_return;
  return s;
}

double BacktestLedger::total_gross_return() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.gross_return;
  return s;
}

double BacktestLedger::total_cost() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.cost;
  return s;
}

opt::WeightVector drift_weights(const opt::WeightVector& w, const Eigen::VectorXd& simple_returns) {
  if (simple_returns.size() != w.size()) throw std::invalid_argument("drift_weights: size mismatch");
  if ((simple_returns.array() <= -1.0).any()) {
    throw std::invalid_argument("drift_weights: simple return at or below -100%");
  }
  const Eigen::VectorXd grown = w.values().cwiseProduct((1.0 + simple_returns.array()).matrix());
  const double total = grown.sum();
  if (!(total > 0.0)) throw std::invalid_argument("drift_weights: non-positive portfolio value");
  return opt::WeightVector(grown / total);
}

namespace {

using Chooser = std::function<opt::SolveReport(std::size_t step, const Eigen::VectorXd& pre_trade)>;

void check_range(const market_data::ReturnPanel& panel, const market_data::Split& split) {
  if (split.test_rows < 1 || split.train_rows < 1 ||
      split.train_rows + split.test_rows != panel.rows()) {
    throw std::invalid_argument("backtest: split does not cover the panel");
  }
}

BacktestLedger simulate(const market_data::ReturnPanel& panel, const market_data::Split& split,
                        const StrategySpec& spec, const Chooser& choose) {
  check_range(panel, split);
  const Eigen::Index n = panel.assets();
  const Eigen::MatrixXd simple = panel.returns().array().exp() - 1.0;

  BacktestLedger ledger;
  ledger.spec = spec;
  ledger.asset_ids = panel.asset_ids();
  ledger.steps.reserve(static_cast<std::size_t>(split.test_rows));

  Eigen::VectorXd pre_trade = Eigen::VectorXd::Zero(n);
  double wealth = 1.0;
  for (Eigen::Index s = 0; s < split.test_rows; ++s) {
    const auto step = static_cast<std::size_t>(s);
    const Eigen::Index row = split.train_rows + s;
    opt::SolveReport report;
    try {
      report = choose(step, pre_trade);
    } catch (const std::exception& e) {
      throw BacktestError(spec.label + " step " + std::to_string(s) + " (" +
                              format_date(panel.dates()[static_cast<std::size_t>(row)]) +
                              "): " + e.what(),
                          step);
    }
    const opt::WeightVector target(report.weights);
    const Eigen::VectorXd r = simple.row(row).transpose();

    LedgerStep st;
    st.row = row;
    st.date = panel.dates()[static_cast<std::size_t>(row)];
    st.target = target.values();
    st.pre_trade = pre_trade;
    st.turnover = (st.target - pre_trade).lpNorm<1>();
    st.cost = spec.beta * st.turnover;
    st.gross_return = r.dot(st.target);
    st.net_return = (1.0 - st.cost) * (1.0 + st.gross_return) - 1.0;
    st.net_return_approx = st.gross_return - st.cost;
    wealth *= 1.0 + st.net_return;
    if (!(wealth > 0.0)) {
      throw BacktestError(spec.label + " step " + std::to_string(s) + ": wealth is no longer positive",
                          step);
    }
    st.wealth = wealth;
    st.iterations = report.iterations;
    st.kkt_residual = report.kkt_residual;
    ledger.steps.push_back(std::move(st));

    pre_trade = drift_weights(target, r).values();
  }
  return ledger;
}

opt::SolveReport equal_weights(Eigen::Index n) {
  opt::SolveReport r;
  r.weights = opt::WeightVector::equal(n).values();
  r.turnover_subgradient = Eigen::VectorXd::Zero(n);
  return r;
}

}  // namespace

BacktestLedger run_backtest(const market_data::ReturnPanel& panel, const StrategySpec& spec,
                            const market_data::Split& split,
                            std::span<const estimators::MomentEstimate> estimates,
                            const opt::SolverOptions& options) {
  spec.validate();
  check_range(panel, split);
  if (static_cast<Eigen::Index>(estimates.size()) != split.test_rows) {
    throw std::invalid_argument(spec.label + ": " + std::to_string(estimates.size()) +
                                " estimates for " + std::to_string(split.test_rows) + " test steps");
  }
  for (std::size_t s = 0; s < estimates.size(); ++s) {
    const auto& e = estimates[s];
    if (e.target_index() != split.train_rows + static_cast<Eigen::Index>(s) ||
        e.mean().size() != panel.assets()) {
      throw BacktestError(spec.label + ": estimate " + std::to_string(s) +
                              " is misaligned with the test range",
                          s);
    }
  }

  const Eigen::Index n = panel.assets();
  const Chooser choose = [&](std::size_t s, const Eigen::VectorXd& pre) -> opt::SolveReport {
    const auto& e = estimates[s];
    switch (spec.framework) {
      case opt::Framework::mv: return opt::solve_mv(e.mean(), e.cov(), spec.gamma, options);
      case opt::Framework::mvc:
        return opt::solve_mvc(e.mean(), e.cov(), spec.gamma, spec.beta, pre, options);
      case opt::Framework::gmv: return opt::solve_gmv(e.cov(), spec.gamma, options);
      case opt::Framework::gmvc: return opt::solve_gmvc(e.cov(), spec.gamma, spec.beta, pre, options);
      case opt::Framework::one_over_n: return equal_weights(n);
    }
    throw std::logic_error("unhandled framework");
  };
  return simulate(panel, split, spec, choose);
}

BacktestLedger one_over_n_rebalanced(const market_data::ReturnPanel& panel,
                                     const market_data::Split& split, double beta) {
  StrategySpec spec;
  spec.label = "1/N";
  spec.framework = opt::Framework::one_over_n;
  spec.mean_source = MeanSource::zero;
  spec.beta = beta;
  spec.validate();
  const Eigen::Index n = panel.assets();
  return simulate(panel, split, spec,
                  [n](std::size_t, const Eigen::VectorXd&) { return equal_weights(n); });
}

std::vector<estimators::MomentEstimate> compose_estimates(
    std::span<const estimators::MomentEstimate> covariance_source,
    const std::vector<Eigen::VectorXd>& means) {
  if (means.size() != covariance_source.size()) {
    throw std::invalid_argument("compose_estimates: " + std::to_string(means.size()) + " means for " +
                                std::to_string(covariance_source.size()) + " covariances");
  }
  std::vector<estimators::MomentEstimate> out;
  out.reserve(means.size());
  for (std::size_t s = 0; s < means.size(); ++s) {
    const auto& c = covariance_source[s];
    out.emplace_back(c.target_index(), means[s], c.cov());
  }
  return out;
}

}  // namespace cryptofolio::backtest
