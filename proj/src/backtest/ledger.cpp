#include "cryptofolio/backtest.hpp"
#include "cryptofolio/csv.hpp"

#include <fstream>

namespace cryptofolio::backtest {

namespace {

const std::vector<std::string> kScalarColumns = {
    "step",      "row",          "date",       "turnover",          "cost",
    "gross_return", "net_return", "net_return_approx", "wealth", "iterations",
    "kkt_residual"};

}  // namespace

void write_ledger(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < kScalarColumns.size(); ++k) out << (k ? "," : "") << kScalarColumns[k];
  for (const auto& id : ledger.asset_ids) out << ",w_" << id;
  for (const auto& id : ledger.asset_ids) out << ",pre_" << id;
  out << '\n';
  for (std::size_t s = 0; s < ledger.steps.size(); ++s) {
    const auto& st = ledger.steps[s];
    out << s << ',' << st.row << ',' << format_date(st.date) << ',' << csv::format_exact(st.turnover)
        << ',' << csv::format_exact(st.cost) << ',' << csv::format_exact(st.gross_return) << ','
        << csv::format_exact(st.net_return) << ',' << csv::format_exact(st.net_return_approx) << ','
        << csv::format_exact(st.wealth) << ',' << st.iterations << ','
        << csv::format_exact(st.kkt_residual);
    for (Eigen::Index i = 0; i < st.target.size(); ++i) out << ',' << csv::format_exact(st.target[i]);
    for (Eigen::Index i = 0; i < st.pre_trade.size(); ++i) out << ',' << csv::format_exact(st.pre_trade[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

BacktestLedger read_ledger(const std::filesystem::path& path, const StrategySpec& spec) {
  const csv::Table table = csv::read(path);
  const std::size_t fixed = kScalarColumns.size();
  if (table.header.size() < fixed + 2 || (table.header.size() - fixed) % 2 != 0) {
    throw std::runtime_error("'" + path.string() + "': unexpected ledger header");
  }
  for (std::size_t k = 0; k < fixed; ++k) {
    if (table.header[k] != kScalarColumns[k]) {
      throw std::runtime_error("'" + path.string() + "': expected column '" + kScalarColumns[k] + "'");
    }
  }
  const std::size_t n = (table.header.size() - fixed) / 2;
  BacktestLedger ledger;
  ledger.spec = spec;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& h = table.header[fixed + i];
    if (h.rfind("w_", 0) != 0) throw std::runtime_error("'" + path.string() + "': bad weight column '" + h + "'");
    ledger.asset_ids.push_back(h.substr(2));
  }
  for (const auto& row : table.rows) {
    if (row.cells.size() != table.header.size()) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(row.line) +
                               ": wrong number of cells");
    }
    try {
      LedgerStep st;
      st.row = static_cast<Eigen::Index>(std::stoll(row.cells[1]));
      st.date = parse_date(row.cells[2]);
      st.turnover = csv::parse_double(row.cells[3]);
      st.cost = csv::parse_double(row.cells[4]);
      st.gross_return = csv::parse_double(row.cells[5]);
      st.net_return = csv::parse_double(row.cells[6]);
      st.net_return_approx = csv::parse_double(row.cells[7]);
      st.wealth = csv::parse_double(row.cells[8]);
      st.iterations = std::stoi(row.cells[9]);
      st.kkt_residual = csv::parse_double(row.cells[10]);
      st.target.resize(static_cast<Eigen::Index>(n));
      st.pre_trade.resize(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        st.target[static_cast<Eigen::Index>(i)] = csv::parse_double(row.cells[fixed + i]);
        st.pre_trade[static_cast<Eigen::Index>(i)] = csv::parse_double(row.cells[fixed + n + i]);
      }
      ledger.steps.push_back(std::move(st));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(row.line) + ": " +
                               e.what());
    }
  }
  return ledger;
}

}  // namespace cryptofolio::backtest
