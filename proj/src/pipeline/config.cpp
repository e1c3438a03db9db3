#include "cryptofolio/estimators.hpp"
#include "cryptofolio/moment_series.hpp"
#include "cryptofolio/pipeline.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cryptofolio::pipeline {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <class T>
std::map<Frequency, T> per_frequency(const json& j, const std::string& where) {
  check_keys(j, where, {"daily", "weekly"});
  std::map<Frequency, T> out;
  for (const auto& [key, value] : j.items()) {
    try {
      out[market_data::parse_frequency(key)] = value.template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where + "." + key + ": " + e.what());
    }
  }
  return out;
}

StrategyTemplate parse_strategy(const json& j, std::size_t index) {
  const std::string where = "strategies[" + std::to_string(index) + "]";
  check_keys(j, where, {"label", "framework", "mean", "cov"});
  StrategyTemplate s;
  try {
    s.framework = optimizers::parse_framework(get<std::string>(j, "framework", where));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  s.label = j.contains("label") ? get<std::string>(j, "label", where)
                                : std::string(optimizers::to_string(s.framework));
  const std::string mean = j.contains("mean") ? get<std::string>(j, "mean", where) : "sample";
  if (mean == "sample") {
    s.mean = backtest::MeanSource::sample;
  } else if (mean == "zero") {
    s.mean = backtest::MeanSource::zero;
  } else if (mean.rfind("external:", 0) == 0 && mean.size() > 9) {
    s.mean = backtest::MeanSource::external;
    s.external = mean.substr(9);
  } else {
    throw ConfigError(where + ".mean: expected 'sample', 'zero' or 'external:<name>', got '" + mean + "'");
  }
  try {
    s.cov = backtest::parse_cov_source(j.contains("cov") ? get<std::string>(j, "cov", where) : "sample");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ".cov: " + e.what());
  }
  return s;
}

evaluation::Summand parse_summand(const std::string& text, const std::string& where) {
  if (text == "net" || text == "r") return evaluation::Summand::net;
  if (text == "one_plus" || text == "1+r") return evaluation::Summand::one_plus;
  throw ConfigError(where + ": expected 'net' or 'one_plus', got '" + text + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"prices", "assets", "frequencies", "train_fraction", "window", "beta", "kappa", "gammas",
              "forecasts", "strategies", "dcc", "solver", "metrics", "output_dir", "threads", "seed"});
  RunConfig c;
  c.source_text = text;
  if (!j.contains("prices")) throw ConfigError("config.prices is required");
  c.prices = resolve(base_dir, get<std::string>(j, "prices", "config"));
  if (j.contains("assets")) c.assets = get<std::vector<std::string>>(j, "assets", "config");
  if (j.contains("frequencies")) {
    c.frequencies.clear();
    for (const auto& f : get<std::vector<std::string>>(j, "frequencies", "config")) {
      try {
        c.frequencies.push_back(market_data::parse_frequency(f));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.frequencies: ") + e.what());
      }
    }
  }
  if (j.contains("train_fraction")) c.train_fraction = get<double>(j, "train_fraction", "config");
  if (j.contains("window")) {
    for (const auto& [f, w] : per_frequency<int>(j["window"], "config.window")) c.window[f] = w;
  }
  if (j.contains("beta")) c.beta = get<double>(j, "beta", "config");
  if (j.contains("kappa")) {
    for (const auto& [f, k] : per_frequency<double>(j["kappa"], "config.kappa")) c.kappa[f] = k;
  }
  if (j.contains("gammas")) c.gammas = get<std::vector<double>>(j, "gammas", "config");
  if (j.contains("forecasts")) {
    const json& fj = j["forecasts"];
    if (!fj.is_object()) throw ConfigError("config.forecasts must be an object");
    for (const auto& [name, paths] : fj.items()) {
      for (const auto& [f, p] : per_frequency<std::string>(paths, "config.forecasts." + name)) {
        c.forecasts[name][f] = resolve(base_dir, p);
      }
    }
  }
  if (j.contains("strategies")) {
    const json& sj = j["strategies"];
    if (!sj.is_array()) throw ConfigError("config.strategies must be an array");
    for (std::size_t k = 0; k < sj.size(); ++k) c.strategies.push_back(parse_strategy(sj[k], k));
  }
  if (j.contains("dcc")) {
    const json& d = j["dcc"];
    check_keys(d, "config.dcc", {"refit_stride", "window"});
    if (d.contains("refit_stride")) c.dcc_refit_stride = get<int>(d, "refit_stride", "config.dcc");
    if (d.contains("window")) {
      const auto w = get<std::string>(d, "window", "config.dcc");
      if (w != "expanding" && w != "rolling") {
        throw ConfigError("config.dcc.window: expected 'expanding' or 'rolling'");
      }
      c.dcc_expanding = w == "expanding";
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "config.solver", {"kkt_tolerance", "feasibility_tolerance", "max_iterations"});
    if (s.contains("kkt_tolerance")) c.solver.kkt_tolerance = get<double>(s, "kkt_tolerance", "config.solver");
    if (s.contains("feasibility_tolerance")) {
      c.solver.feasibility_tolerance = get<double>(s, "feasibility_tolerance", "config.solver");
    }
    if (s.contains("max_iterations")) c.solver.max_iterations = get<int>(s, "max_iterations", "config.solver");
  }
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    check_keys(m, "config.metrics", {"returns", "risk"});
    if (m.contains("returns")) {
      c.convention.returns = parse_summand(get<std::string>(m, "returns", "config.metrics"), "config.metrics.returns");
    }
    if (m.contains("risk")) {
      c.convention.risk = parse_summand(get<std::string>(m, "risk", "config.metrics"), "config.metrics.risk");
    }
  }
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get<std::string>(j, "output_dir", "config"));
  else c.output_dir = resolve(base_dir, "run");
  if (j.contains("threads")) c.threads = get<int>(j, "threads", "config");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "config");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::vector<Diagnostic> validate(const RunConfig& c) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };

  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) add("train_fraction", "must lie in (0, 1)");
  if (!(c.beta >= 0.0)) add("beta", "must be non-negative");
  if (c.gammas.empty()) add("gammas", "at least one risk-aversion value is required");
  for (double g : c.gammas) {
    if (!(g > 0.0)) add("gammas", "every gamma must be positive");
  }
  if (c.frequencies.empty()) add("frequencies", "at least one frequency is required");
  if (c.dcc_refit_stride < 1) add("dcc.refit_stride", "must be at least 1");
  if (!(c.solver.kkt_tolerance > 0.0)) add("solver.kkt_tolerance", "must be positive");
  if (c.solver.max_iterations < 0) add("solver.max_iterations", "must be non-negative");
  if (c.threads < 0) add("threads", "must be non-negative");
  for (Frequency f : c.frequencies) {
    const std::string name(market_data::to_string(f));
    if (!(c.kappa.count(f) && c.kappa.at(f) > 0.0)) add("kappa." + name, "must be positive");
    if (!(c.window.count(f) && c.window.at(f) >= 2)) add("window." + name, "must be at least 2");
  }

  std::set<std::string> labels;
  std::set<std::string> slugs;
  bool any_dcc = false;
  for (const auto& s : c.strategies) {
    if (s.label.empty()) add("strategies", "empty strategy label");
    if (!labels.insert(s.label).second) add("strategies", "duplicate label '" + s.label + "'");
    else if (!slugs.insert(slug(s.label)).second) {
      add("strategies", "label '" + s.label + "' collides with another label after file-name mapping");
    }
    if (s.label == "1/N") add("strategies", "label '1/N' is reserved for the benchmark");
    if (s.cov == backtest::CovSource::dcc && s.framework != optimizers::Framework::one_over_n) any_dcc = true;
    if (s.mean == backtest::MeanSource::external) {
      const auto it = c.forecasts.find(s.external);
      if (it == c.forecasts.end()) {
        add("strategies." + s.label, "unknown forecast set '" + s.external + "'");
        continue;
      }
      for (Frequency f : c.frequencies) {
        if (!it->second.count(f)) {
          add("forecasts." + s.external, "no " + std::string(market_data::to_string(f)) + " file");
        }
      }
    }
  }
  for (const auto& [name, files] : c.forecasts) {
    for (const auto& [f, path] : files) {
      if (!std::filesystem::is_regular_file(path)) {
        add("forecasts." + name + "." + std::string(market_data::to_string(f)),
            "file not found: " + path.string());
      }
    }
  }

  if (!std::filesystem::is_regular_file(c.prices)) {
    add("prices", "file not found: " + c.prices.string());
    return out;
  }
  std::optional<market_data::PricePanel> prices;
  try {
    prices.emplace(market_data::load_prices(c.prices, c.assets));
  } catch (const market_data::DataError& e) {
    add("prices", std::string(e.what()) + (e.row() ? " (line " + std::to_string(e.row()) + ")" : ""));
    return out;
  } catch (const std::exception& e) {
    add("prices", e.what());
    return out;
  }
  if (any_dcc && prices->assets() < 2) add("strategies", "DCC covariances need at least two assets");

  for (Frequency f : c.frequencies) {
    const std::string name(market_data::to_string(f));
    if (!c.window.count(f) || !(c.train_fraction > 0.0 && c.train_fraction < 1.0)) continue;
    try {
      const auto returns = market_data::to_log_returns(*prices, f);
      market_data::SplitSpec spec{c.train_fraction, c.window.at(f), f};
      const auto sp = market_data::split(returns, spec);
      if (any_dcc && sp.train_rows < 100) {
        add("window." + name, "DCC-EGARCH needs at least 100 training rows, have " +
                                  std::to_string(sp.train_rows));
      }
      std::vector<Date> test_dates(returns.dates().begin() + sp.train_rows, returns.dates().end());
      for (const auto& [fname, files] : c.forecasts) {
        const auto it = files.find(f);
        if (it == files.end() || !std::filesystem::is_regular_file(it->second)) continue;
        try {
          estimators::load_forecasts(it->second, test_dates, returns.asset_ids(), fname);
        } catch (const std::exception& e) {
          add("forecasts." + fname + "." + name, e.what());
        }
      }
    } catch (const std::exception& e) {
      add("window." + name, e.what());
    }
  }
  return out;
}

}  // namespace cryptofolio::pipeline
