#include "cryptofolio/csv.hpp"
#include "cryptofolio/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace cryptofolio::market_data {

std::string_view to_string(Frequency f) { return f == Frequency::daily ? "daily" : "weekly"; }

Frequency parse_frequency(std::string_view text) {
  if (text == "daily") return Frequency::daily;
  if (text == "weekly") return Frequency::weekly;
  throw std::invalid_argument("unknown frequency '" + std::string(text) + "'");
}

int stride_days(Frequency f) { return f == Frequency::daily ? 1 : 7; }

PricePanel::PricePanel(std::vector<Date> dates, Eigen::MatrixXd prices,
                       std::vector<std::string> asset_ids)
    : dates_(std::move(dates)), prices_(std::move(prices)), asset_ids_(std::move(asset_ids)) {
  if (static_cast<Eigen::Index>(dates_.size()) != prices_.rows()) {
    throw std::invalid_argument("price panel: date count does not match row count");
  }
  if (static_cast<Eigen::Index>(asset_ids_.size()) != prices_.cols()) {
    throw std::invalid_argument("price panel: asset label count does not match column count");
  }
  for (std::size_t t = 1; t < dates_.size(); ++t) {
    if (!(dates_[t - 1] < dates_[t])) {
      throw DataError("price panel: dates not strictly increasing at row " + std::to_string(t),
                      t);
    }
  }
  for (Eigen::Index t = 0; t < prices_.rows(); ++t) {
    for (Eigen::Index i = 0; i < prices_.cols(); ++i) {
      const double p = prices_(t, i);
      if (!std::isfinite(p) || p <= 0.0) {
        throw DataError("price panel: non-positive price for " + asset_ids_[i] + " at row " +
                            std::to_string(t),
                        static_cast<std::size_t>(t));
      }
    }
  }
}

ReturnPanel::ReturnPanel(std::vector<Date> dates, Eigen::MatrixXd returns,
                         std::vector<std::string> asset_ids, Frequency frequency)
    : dates_(std::move(dates)),
      returns_(std::move(returns)),
      asset_ids_(std::move(asset_ids)),
      frequency_(frequency) {
  if (static_cast<Eigen::Index>(dates_.size()) != returns_.rows() ||
      static_cast<Eigen::Index>(asset_ids_.size()) != returns_.cols()) {
    throw std::invalid_argument("return panel: shape mismatch");
  }
  if (!returns_.allFinite()) throw std::invalid_argument("return panel: non-finite return");
}

PricePanel load_prices(const std::filesystem::path& path,
                       const std::vector<std::string>& asset_ids) {
  const csv::Table table = csv::read(path);
  if (table.header.empty() || table.header.front() != "date") {
    throw DataError("'" + path.string() + "': first header column must be 'date'", 1);
  }
  std::vector<std::string> wanted = asset_ids;
  if (wanted.empty()) wanted.assign(table.header.begin() + 1, table.header.end());

  std::vector<std::size_t> columns;
  for (const auto& id : wanted) {
    const auto it = std::find(table.header.begin() + 1, table.header.end(), id);
    if (it == table.header.end()) {
      throw DataError("'" + path.string() + "': missing asset column '" + id + "'", 1);
    }
    columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }

  struct Parsed {
    Date date;
    std::vector<double> prices;
    std::size_t line;
  };
  std::vector<Parsed> parsed;
  parsed.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.cells.size() != table.header.size()) {
      throw DataError("row " + std::to_string(row.line) + ": expected " +
                          std::to_string(table.header.size()) + " cells, found " +
                          std::to_string(row.cells.size()),
                      row.line);
    }
    Parsed p{{}, {}, row.line};
    try {
      p.date = parse_date(row.cells[0]);
      for (auto c : columns) p.prices.push_back(csv::parse_double(row.cells[c]));
    } catch (const std::invalid_argument& e) {
      throw DataError("row " + std::to_string(row.line) + ": " + e.what(), row.line);
    }
    for (std::size_t k = 0; k < p.prices.size(); ++k) {
      if (!(p.prices[k] > 0.0) || !std::isfinite(p.prices[k])) {
        throw DataError("row " + std::to_string(row.line) + ": non-positive price for '" +
                            wanted[k] + "'",
                        row.line);
      }
    }
    parsed.push_back(std::move(p));
  }
  std::stable_sort(parsed.begin(), parsed.end(),
                   [](const Parsed& a, const Parsed& b) { return a.date < b.date; });
  for (std::size_t t = 1; t < parsed.size(); ++t) {
    if (parsed[t].date == parsed[t - 1].date) {
      throw DataError("row " + std::to_string(parsed[t].line) + ": duplicate date " +
                          format_date(parsed[t].date),
                      parsed[t].line);
    }
  }

  std::vector<Date> dates;
  Eigen::MatrixXd prices(static_cast<Eigen::Index>(parsed.size()),
                         static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t t = 0; t < parsed.size(); ++t) {
    dates.push_back(parsed[t].date);
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = parsed[t].prices[k];
    }
  }
  return PricePanel(std::move(dates), std::move(prices), std::move(wanted));
}

ReturnPanel to_log_returns(const PricePanel& panel, Frequency frequency) {
  const Eigen::Index stride = stride_days(frequency);
  const Eigen::Index rows = (panel.rows() - 1) / stride;
  if (panel.rows() < 2 || rows < 1) {
    throw std::invalid_argument("to_log_returns: fewer than 2 usable prices");
  }
  Eigen::MatrixXd returns(rows, panel.assets());
  std::vector<Date> dates;
  dates.reserve(static_cast<std::size_t>(rows));
  const Eigen::MatrixXd logp = panel.prices().array().log().matrix();
  for (Eigen::Index t = 0; t < rows; ++t) {
    const Eigen::Index from = t * stride;
    const Eigen::Index to = from + stride;
    returns.row(t) = logp.row(to) - logp.row(from);
    dates.push_back(panel.dates()[static_cast<std::size_t>(to)]);
  }
  return ReturnPanel(std::move(dates), std::move(returns), panel.asset_ids(), frequency);
}

void write_returns(const ReturnPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "date";
  for (const auto& id : panel.asset_ids()) out << ',' << id;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    out << format_date(panel.dates()[static_cast<std::size_t>(t)]);
    for (Eigen::Index i = 0; i < panel.assets(); ++i) {
      out << ',' << csv::format_exact(panel.returns()(t, i));
    }
    out << '\n';
  }
}

Split split(const ReturnPanel& panel, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("split: train fraction must lie in (0, 1)");
  }
  if (spec.window < 1) throw std::invalid_argument("split: window length must be positive");
  const Eigen::Index total = panel.rows();
  if (total < spec.window + 1) {
    throw std::invalid_argument("split: panel has " + std::to_string(total) +
                                " rows, fewer than window + 1 = " +
                                std::to_string(spec.window + 1));
  }
  Split s;
  s.train_rows = static_cast<Eigen::Index>(std::floor(spec.train_fraction * static_cast<double>(total)));
  s.test_rows = total - s.train_rows;
  if (spec.window > s.train_rows) {
    throw std::invalid_argument("split: window " + std::to_string(spec.window) +
                                " exceeds train length " + std::to_string(s.train_rows));
  }
  if (s.test_rows < 1) throw std::invalid_argument("split: empty test range");
  return s;
}

}  // namespace cryptofolio::market_data
