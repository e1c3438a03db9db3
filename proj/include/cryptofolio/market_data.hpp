#pragma once

#include "cryptofolio/date.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cryptofolio::market_data {

enum class Frequency { daily, weekly };

std::string_view to_string(Frequency f);
Frequency parse_frequency(std::string_view text);

/// Days between consecutive closes for a frequency (1 or 7).
int stride_days(Frequency f);

/// Input error tied to a specific data row. `row` is the 1-based line number
/// in the source file (0 when not applicable).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Closing prices, T_raw rows by N assets. Construction validates: strictly
/// increasing dates, strictly positive finite prices, matching shapes.
class PricePanel {
 public:
  PricePanel(std::vector<Date> dates, Eigen::MatrixXd prices, std::vector<std::string> asset_ids);

  const std::vector<Date>& dates() const noexcept { return dates_; }
  const Eigen::MatrixXd& prices() const noexcept { return prices_; }
  const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
  Eigen::Index rows() const noexcept { return prices_.rows(); }
  Eigen::Index assets() const noexcept { return prices_.cols(); }

 private:
  std::vector<Date> dates_;
  Eigen::MatrixXd prices_;
  std::vector<std::string> asset_ids_;
};

/// Log returns. Row t is ln p(t+1) - ln p(t) over one frequency step and is
/// stamped with the date of the closing price p(t+1).
class ReturnPanel {
 public:
  ReturnPanel(std::vector<Date> dates, Eigen::MatrixXd returns, std::vector<std::string> asset_ids,
              Frequency frequency);

  const std::vector<Date>& dates() const noexcept { return dates_; }
  const Eigen::MatrixXd& returns() const noexcept { return returns_; }
  const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
  Frequency frequency() const noexcept { return frequency_; }
  Eigen::Index rows() const noexcept { return returns_.rows(); }
  Eigen::Index assets() const noexcept { return returns_.cols(); }

 private:
  std::vector<Date> dates_;
  Eigen::MatrixXd returns_;
  std::vector<std::string> asset_ids_;
  Frequency frequency_;
};

/// Reads `date,<asset1>,...` closes. When `asset_ids` is empty every column is
/// loaded; otherwise only the requested columns, in the requested order.
/// Rows are sorted by date. Errors carry the offending line number.
PricePanel load_prices(const std::filesystem::path& path,
                       const std::vector<std::string>& asset_ids = {});

/// Daily: consecutive closes. Weekly: every 7th close starting from the first
/// row; trailing rows that do not complete a week are dropped.
ReturnPanel to_log_returns(const PricePanel& panel, Frequency frequency);

/// Writes a return panel in the price-file layout.
void write_returns(const ReturnPanel& panel, const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.7;
  /// Sample-estimator window length M.
  int window = 182;
  Frequency frequency = Frequency::daily;

  static int default_window(Frequency f) { return f == Frequency::daily ? 182 : 26; }
};

struct Split {
  Eigen::Index train_rows = 0;
  Eigen::Index test_rows = 0;  // Q
};

/// Train length is floor(train_fraction * T); test length Q = T - train.
Split split(const ReturnPanel& panel, const SplitSpec& spec);

struct DescriptiveStats {
  double min = 0.0;
  double max = 0.0;
  /// Price growth over the sampled range, p_last / p_first - 1, in percent.
  double growth_pct = 0.0;
  double mean = 0.0;
  /// Sample standard deviation (divisor T - 1).
  double std_dev = 0.0;
  /// Standardized third central moment; empty for zero-variance series.
  std::optional<double> skewness;
  /// Raw (non-excess) standardized fourth central moment; a normal is 3.
  std::optional<double> kurtosis;
  bool degenerate() const { return !skewness.has_value(); }
};

/// Per-asset statistics; requires at least 4 rows.
std::vector<DescriptiveStats> descriptive_stats(const ReturnPanel& panel);

/// Pearson correlation over rows [first, first + count). Throws when an asset
/// has zero variance in the slice or the slice has fewer than 2 rows.
Eigen::MatrixXd unconditional_correlation(const ReturnPanel& panel, Eigen::Index first,
                                          Eigen::Index count);

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// JB = T/6 (S^2 + (K-3)^2/4) with a chi-square(2) upper-tail p-value.
TestResult jarque_bera(const Eigen::VectorXd& series);

/// Engle's LM test: regress squared demeaned returns on `lags` of their own
/// lags; statistic n R^2 with n = T - lags usable rows, chi-square(lags).
TestResult arch_lm(const Eigen::VectorXd& series, int lags);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double dof);

}  // namespace cryptofolio::market_data
