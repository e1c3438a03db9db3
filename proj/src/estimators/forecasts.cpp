#include "cryptofolio/csv.hpp"
#include "cryptofolio/estimators.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace cryptofolio::estimators {

ForecastSeries load_forecasts(const std::filesystem::path& path,
                              const std::vector<Date>& test_dates,
                              const std::vector<std::string>& asset_ids,
                              const std::string& source) {
  const csv::Table table = csv::read(path);
  if (table.header.empty() || table.header.front() != "date") {
    throw std::runtime_error("'" + path.string() + "': first header column must be 'date'");
  }
  std::vector<std::size_t> columns;
  for (const auto& id : asset_ids) {
    const auto it = std::find(table.header.begin() + 1, table.header.end(), id);
    if (it == table.header.end()) {
      throw std::runtime_error("'" + path.string() + "': missing forecast column '" + id + "'");
    }
    columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }

  std::map<Date, Eigen::VectorXd> by_date;
  for (const auto& row : table.rows) {
    if (row.cells.size() != table.header.size()) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(row.line) +
                               ": wrong cell count");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(columns.size()));
    Date d;
    try {
      d = parse_date(row.cells[0]);
      for (std::size_t k = 0; k < columns.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = csv::parse_double(row.cells[columns[k]]);
      }
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(row.line) + ": " +
                               e.what());
    }
    if (!by_date.emplace(d, v).second) {
      throw std::runtime_error("'" + path.string() + "': duplicate forecast date " + format_date(d));
    }
  }

  ForecastSeries out;
  out.source = source;
  out.dates = test_dates;
  out.means.resize(static_cast<Eigen::Index>(test_dates.size()),
                   static_cast<Eigen::Index>(asset_ids.size()));
  for (std::size_t t = 0; t < test_dates.size(); ++t) {
    const auto it = by_date.find(test_dates[t]);
    if (it == by_date.end()) {
      throw std::runtime_error("'" + path.string() + "': no forecast for test date " +
                               format_date(test_dates[t]));
    }
    out.means.row(static_cast<Eigen::Index>(t)) = it->second.transpose();
  }
  out.dropped_rows = by_date.size() - test_dates.size();
  return out;
}

}  // namespace cryptofolio::estimators
