#pragma once

#include "cryptofolio/backtest.hpp"
#include "cryptofolio/evaluation.hpp"
#include "cryptofolio/market_data.hpp"
#include "cryptofolio/optimizers.hpp"
#include "cryptofolio/parallel.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryptofolio::pipeline {

using market_data::Frequency;

/// Strategy template, expanded over every configured gamma.
struct StrategyTemplate {
  std::string label;
  optimizers::Framework framework = optimizers::Framework::mv;
  backtest::MeanSource mean = backtest::MeanSource::sample;
  std::string external;  // forecast set name for MeanSource::external
  backtest::CovSource cov = backtest::CovSource::sample;
};

struct RunConfig {
  std::filesystem::path prices;
  /// Columns to load, in order; empty loads every column.
  std::vector<std::string> assets;
  std::vector<Frequency> frequencies = {Frequency::daily, Frequency::weekly};
  double train_fraction = 0.7;
  std::map<Frequency, int> window = {{Frequency::daily, 182}, {Frequency::weekly, 26}};
  double beta = 0.005;
  std::map<Frequency, double> kappa = {{Frequency::daily, 365.0}, {Frequency::weekly, 52.0}};
  std::vector<double> gammas = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// forecasts[name][frequency] = path of a `date,<assets...>` file.
  std::map<std::string, std::map<Frequency, std::filesystem::path>> forecasts;
  std::vector<StrategyTemplate> strategies;
  int dcc_refit_stride = 1;
  /// DCC-EGARCH fitted on all earlier rows (true) or the trailing training
  /// length only (false).
  bool dcc_expanding = true;
  optimizers::SolverOptions solver;
  evaluation::MetricsConvention convention;
  std::filesystem::path output_dir = "run";
  int threads = 0;
  std::uint64_t seed = 20230714;

  /// Raw configuration text, hashed into the manifest.
  std::string source_text;
};

/// Error in the configuration text itself (syntax, unknown keys, bad types).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSON configuration. Relative paths resolve against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Checks files, date coverage, window lengths and parameter ranges without
/// running anything. An empty list means the config is runnable.
std::vector<Diagnostic> validate(const RunConfig& config);

/// Failure in one pipeline stage; partial outputs are marked stale.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  Exec exec = Exec::parallel;
};

struct RunSummary {
  std::filesystem::path run_dir;
  std::size_t ledgers = 0;
  std::vector<std::filesystem::path> reports;
};

/// ingest -> estimate -> backtest -> evaluate -> report, all under
/// config.output_dir. Writes a STALE marker first and removes it only after
/// the manifest is complete.
RunSummary run(const RunConfig& config, const RunOptions& options = {});

/// Re-renders the report files of a finished run from its stored ledgers.
std::vector<std::filesystem::path> rerender_reports(const std::filesystem::path& run_dir);

/// Descriptive statistics, normality and ARCH tests, and test-range
/// correlations for every configured frequency, as aligned text.
std::string stats_report(const RunConfig& config);

/// File-name-safe form of a strategy label.
std::string slug(const std::string& label);

}  // namespace cryptofolio::pipeline
