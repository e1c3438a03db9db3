#include "cryptofolio/csv.hpp"
#include "cryptofolio/evaluation.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cryptofolio::evaluation {

using nlohmann::json;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const AggregateMetrics& a, const AggregateMetrics& b) {
  return same(a.net_return, b.net_return) && same(a.risk, b.risk) &&
         same(a.gross_return, b.gross_return) && same(a.costs, b.costs);
}

bool same(const FeeResult& a, const FeeResult& b) {
  return same(a.phi1, b.phi1) && same(a.phi2, b.phi2) && same(a.b, b.b) && same(a.c, b.c) &&
         same(a.discriminant, b.discriminant) && a.real == b.real;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json to_json(const AggregateMetrics& m) {
  return {{"net_return", number(m.net_return)},
          {"risk", number(m.risk)},
          {"gross_return", number(m.gross_return)},
          {"costs", number(m.costs)}};
}

AggregateMetrics metrics_from(const json& j) {
  return {number(j.at("net_return")), number(j.at("risk")), number(j.at("gross_return")),
          number(j.at("costs"))};
}

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string exact_or_empty(const std::optional<double>& v) {
  return v ? csv::format_exact(*v) : std::string("undefined");
}

}  // namespace

bool PerformanceReport::operator==(const PerformanceReport& o) const {
  if (frequency != o.frequency || !same(kappa, o.kappa) || test_rows != o.test_rows ||
      !same(benchmark, o.benchmark) || strategies.size() != o.strategies.size()) {
    return false;
  }
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const auto& a = strategies[k];
    const auto& b = o.strategies[k];
    if (a.label != b.label || a.gammas != b.gammas || a.fees.size() != b.fees.size() ||
        a.average_fee.has_value() != b.average_fee.has_value() ||
        (a.average_fee && !same(*a.average_fee, *b.average_fee)) || !same(a.metrics, b.metrics) ||
        a.positive != b.positive) {
      return false;
    }
    for (std::size_t i = 0; i < a.fees.size(); ++i) {
      if (!same(a.fees[i], b.fees[i])) return false;
    }
  }
  return true;
}

PerformanceReport build_report(const std::string& frequency,
                               const std::vector<StrategyLedgers>& strategies,
                               const backtest::BacktestLedger& benchmark, double kappa,
                               const MetricsConvention& convention) {
  PerformanceReport report;
  report.frequency = frequency;
  report.kappa = kappa;
  report.test_rows = benchmark.steps.size();
  report.benchmark = aggregate_metrics(std::span(&benchmark, 1), convention);
  const std::vector<double> bench = gross_factors(benchmark);

  for (const auto& s : strategies) {
    if (s.ledgers.empty()) throw std::invalid_argument("strategy '" + s.label + "' has no ledgers");
    StrategyResult r;
    r.label = s.label;
    for (const auto& ledger : s.ledgers) {
      if (ledger.steps.size() != bench.size()) {
        throw std::invalid_argument("strategy '" + s.label + "' covers " +
                                    std::to_string(ledger.steps.size()) + " steps, benchmark " +
                                    std::to_string(bench.size()));
      }
      r.gammas.push_back(ledger.spec.gamma);
      const std::vector<double> star = gross_factors(ledger);
      r.fees.push_back(performance_fee(star, bench, ledger.spec.gamma));
    }
    r.average_fee = average_annualized_pf(r.fees, kappa);
    r.metrics = aggregate_metrics(s.ledgers, convention);
    r.positive = r.average_fee && *r.average_fee > 0.0;
    report.strategies.push_back(std::move(r));
  }
  return report;
}

std::string report_to_json(const PerformanceReport& report) {
  json j;
  j["frequency"] = report.frequency;
  j["kappa"] = report.kappa;
  j["test_rows"] = report.test_rows;
  j["benchmark"] = to_json(report.benchmark);
  json list = json::array();
  for (const auto& s : report.strategies) {
    json fees = json::array();
    for (const auto& f : s.fees) {
      fees.push_back({{"phi1", number(f.phi1)},
                      {"phi2", number(f.phi2)},
                      {"b", number(f.b)},
                      {"c", number(f.c)},
                      {"discriminant", number(f.discriminant)},
                      {"real", f.real}});
    }
    list.push_back({{"label", s.label},
                    {"gammas", s.gammas},
                    {"fees", fees},
                    {"average_fee", s.average_fee ? json(*s.average_fee) : json(nullptr)},
                    {"metrics", to_json(s.metrics)},
                    {"positive", s.positive}});
  }
  j["strategies"] = list;
  return j.dump(2) + "\n";
}

PerformanceReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  PerformanceReport r;
  r.frequency = j.at("frequency").get<std::string>();
  r.kappa = j.at("kappa").get<double>();
  r.test_rows = j.at("test_rows").get<std::size_t>();
  r.benchmark = metrics_from(j.at("benchmark"));
  for (const auto& s : j.at("strategies")) {
    StrategyResult out;
    out.label = s.at("label").get<std::string>();
    out.gammas = s.at("gammas").get<std::vector<double>>();
    for (const auto& f : s.at("fees")) {
      FeeResult fee;
      fee.phi1 = number(f.at("phi1"));
      fee.phi2 = number(f.at("phi2"));
      fee.b = number(f.at("b"));
      fee.c = number(f.at("c"));
      fee.discriminant = number(f.at("discriminant"));
      fee.real = f.at("real").get<bool>();
      out.fees.push_back(fee);
    }
    if (!s.at("average_fee").is_null()) out.average_fee = s.at("average_fee").get<double>();
    out.metrics = metrics_from(s.at("metrics"));
    out.positive = s.at("positive").get<bool>();
    r.strategies.push_back(std::move(out));
  }
  return r;
}

std::string metrics_csv(const PerformanceReport& report) {
  std::ostringstream out;
  out << "label,net_return,risk,gross_return,costs\n";
  auto row = [&](const std::string& label, const AggregateMetrics& m) {
    out << label << ',' << csv::format_exact(m.net_return) << ',' << csv::format_exact(m.risk) << ','
        << csv::format_exact(m.gross_return) << ',' << csv::format_exact(m.costs) << '\n';
  };
  row("1/N", report.benchmark);
  for (const auto& s : report.strategies) row(s.label, s.metrics);
  return out.str();
}

std::string fees_csv(const PerformanceReport& report) {
  std::ostringstream out;
  out << "label,average_fee,positive";
  std::size_t width = 0;
  for (const auto& s : report.strategies) width = std::max(width, s.gammas.size());
  const std::vector<double>* gammas = nullptr;
  for (const auto& s : report.strategies) {
    if (s.gammas.size() == width) gammas = &s.gammas;
  }
  for (std::size_t k = 0; k < width; ++k) {
    out << ",phi2_g" << (gammas ? csv::format_exact((*gammas)[k]) : std::to_string(k + 1));
  }
  out << '\n';
  for (const auto& s : report.strategies) {
    out << s.label << ',' << exact_or_empty(s.average_fee) << ',' << (s.positive ? 1 : 0);
    for (std::size_t k = 0; k < width; ++k) {
      out << ',';
      if (k < s.fees.size()) out << (s.fees[k].real ? csv::format_exact(s.fees[k].phi2) : "undefined");
    }
    out << '\n';
  }
  return out.str();
}

std::string render_text(const PerformanceReport& report) {
  std::ostringstream out;
  char line[256];
  out << "Frequency: " << report.frequency << "   test periods: " << report.test_rows
      << "   kappa: " << csv::format_exact(report.kappa) << "\n\n";
  std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s %12s\n", "strategy", "net return",
                "risk", "gross return", "costs");
  out << line;
  auto row = [&](const std::string& label, const AggregateMetrics& m) {
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s %12s\n", label.c_str(),
                  fixed(m.net_return).c_str(), fixed(m.risk).c_str(), fixed(m.gross_return).c_str(),
                  fixed(m.costs).c_str());
    out << line;
  };
  row("1/N", report.benchmark);
  for (const auto& s : report.strategies) row(s.label, s.metrics);

  out << '\n';
  std::snprintf(line, sizeof(line), "%-24s %16s\n", "strategy", "annualized fee");
  out << line;
  for (const auto& s : report.strategies) {
    std::string fee = s.average_fee ? fixed(*s.average_fee) : "undefined";
    if (s.positive) fee += " +";
    std::snprintf(line, sizeof(line), "%-24s %16s\n", s.label.c_str(), fee.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace cryptofolio::evaluation
