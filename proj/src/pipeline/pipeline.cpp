#include "cryptofolio/pipeline.hpp"

#include "cryptofolio/csv.hpp"
#include "cryptofolio/estimators.hpp"
#include "cryptofolio/hash.hpp"
#include "cryptofolio/moment_series.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace cryptofolio::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string name_of(Frequency f) { return std::string(market_data::to_string(f)); }

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string gamma_tag(double g) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", g);
  return buf;
}

std::string mean_key(const StrategyTemplate& s) {
  return s.mean == backtest::MeanSource::external ? "external:" + s.external
                                                  : std::string(backtest::to_string(s.mean));
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json egarch_json(const estimators::EgarchFit& f) {
  json se = json::array();
  for (Eigen::Index i = 0; i < f.std_errors.size(); ++i) se.push_back(number(f.std_errors[i]));
  return {{"mu", f.params.mu},         {"omega", f.params.omega},   {"alpha1", f.params.alpha1},
          {"alpha2", f.params.alpha2}, {"beta1", f.params.beta1},   {"nu", f.params.nu},
          {"loglik", number(f.loglik)}, {"iterations", f.iterations}, {"converged", f.converged},
          {"std_errors", se},          {"weak_dynamics", f.weak_dynamics}};
}

json dcc_json(const estimators::DccFit& f) {
  return {{"a", f.params.a},
          {"b", f.params.b},
          {"loglik", number(f.loglik)},
          {"restricted_loglik", number(f.restricted_loglik)},
          {"iterations", f.iterations},
          {"converged", f.converged},
          {"boundary", f.boundary},
          {"restricted", f.restricted}};
}

json strategy_json(const backtest::StrategySpec& s) {
  return {{"label", s.label},
          {"framework", std::string(optimizers::to_string(s.framework))},
          {"mean", std::string(backtest::to_string(s.mean_source))},
          {"external", s.external_name},
          {"cov", std::string(backtest::to_string(s.cov_source))},
          {"gamma", s.gamma},
          {"beta", s.beta}};
}

backtest::StrategySpec strategy_from(const json& j) {
  backtest::StrategySpec s;
  s.label = j.at("label").get<std::string>();
  s.framework = optimizers::parse_framework(j.at("framework").get<std::string>());
  const auto mean = j.at("mean").get<std::string>();
  s.mean_source = mean == "sample"     ? backtest::MeanSource::sample
                  : mean == "external" ? backtest::MeanSource::external
                                       : backtest::MeanSource::zero;
  s.external_name = j.at("external").get<std::string>();
  s.cov_source = backtest::parse_cov_source(j.at("cov").get<std::string>());
  s.gamma = j.at("gamma").get<double>();
  s.beta = j.at("beta").get<double>();
  return s;
}

std::string summand_name(evaluation::Summand s) {
  return s == evaluation::Summand::net ? "net" : "one_plus";
}

evaluation::Summand summand_from(const std::string& s) {
  return s == "net" ? evaluation::Summand::net : evaluation::Summand::one_plus;
}

std::vector<fs::path> write_report_files(const fs::path& run_dir, const std::string& freq,
                                         const evaluation::PerformanceReport& report) {
  const fs::path dir = run_dir / "reports" / freq;
  const std::vector<std::pair<fs::path, std::string>> files = {
      {dir / "report.json", evaluation::report_to_json(report)},
      {dir / "metrics.csv", evaluation::metrics_csv(report)},
      {dir / "fees.csv", evaluation::fees_csv(report)},
      {dir / "report.txt", evaluation::render_text(report)}};
  std::vector<fs::path> out;
  for (const auto& [path, text] : files) {
    write_text(path, text);
    out.push_back(path);
  }
  return out;
}

json file_hashes(const fs::path& run_dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), run_dir).generic_string();
    if (rel == "manifest.json" || rel == "STALE") continue;
    names.push_back(rel);
  }
  std::sort(names.begin(), names.end());
  json files = json::object();
  for (const auto& n : names) files[n] = sha256_file(run_dir / n);
  return files;
}

class StageClock {
 public:
  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageClock* self;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
        self->timings_[stage] = self->timings_.value(stage, 0.0) + ms.count();
      }
    } record{this, stage, start};
    try {
      return f();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }
  const json& timings() const { return timings_; }

 private:
  json timings_ = json::object();
};

struct EstimateSet {
  std::vector<estimators::MomentEstimate> sample;
  std::optional<estimators::DccEgarchSeries> dcc;
  std::map<std::string, estimators::ForecastSeries> external;
};

std::vector<Eigen::VectorXd> means_for(const std::string& key, const EstimateSet& e, Eigen::Index n) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(e.sample.size());
  if (key == "sample") {
    for (const auto& s : e.sample) out.push_back(s.mean());
  } else if (key == "zero") {
    out.assign(e.sample.size(), Eigen::VectorXd::Zero(n));
  } else {
    const auto& f = e.external.at(key.substr(9));
    for (Eigen::Index s = 0; s < f.means.rows(); ++s) out.push_back(f.means.row(s).transpose());
  }
  return out;
}

std::string diagnostics_csv(const EstimateSet& e, const Eigen::MatrixXd& actual) {
  std::ostringstream out;
  out << "estimator,kind,rmse,variation_level\n";
  auto mean_row = [&](const std::string& name, const Eigen::MatrixXd& means) {
    out << name << ",mean," << csv::format_exact(evaluation::aggregate_rmse(means, actual)) << ','
        << (means.rows() >= 2 ? csv::format_exact(evaluation::variation_level_mean(means)) : "") << '\n';
  };
  auto cov_row = [&](const std::string& name, const std::vector<estimators::MomentEstimate>& est) {
    std::vector<Eigen::MatrixXd> covs;
    for (const auto& s : est) covs.push_back(s.cov());
    out << name << ",cov,," << (covs.size() >= 2 ? csv::format_exact(evaluation::variation_level_cov(covs)) : "")
        << '\n';
  };
  Eigen::MatrixXd sm(actual.rows(), actual.cols());
  for (Eigen::Index s = 0; s < sm.rows(); ++s) sm.row(s) = e.sample[static_cast<std::size_t>(s)].mean().transpose();
  mean_row("sample", sm);
  for (const auto& [name, f] : e.external) mean_row("external:" + name, f.means);
  cov_row("sample", e.sample);
  if (e.dcc) cov_row("dcc", e.dcc->estimates);
  return out.str();
}

}  // namespace

std::string slug(const std::string& label) {
  std::string out;
  for (unsigned char c : label) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') out.push_back(static_cast<char>(c));
    else if (c == '/') out += "over";
    else out.push_back('_');
  }
  return out.empty() ? "strategy" : out;
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
  if (const auto diags = validate(config); !diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.field + ": " + d.message;
    throw StageError("validate", msg);
  }
  set_thread_count(config.threads);

  const fs::path run_dir = config.output_dir;
  fs::create_directories(run_dir);
  for (const char* owned : {"ledgers", "reports", "params"}) fs::remove_all(run_dir / owned);
  fs::remove(run_dir / "manifest.json");
  write_text(run_dir / "STALE", "run in progress\n");

  RunSummary summary;
  summary.run_dir = run_dir;
  StageClock clock;
  json index = {{"version", kVersion},
                {"convention",
                 {{"returns", summand_name(config.convention.returns)},
                  {"risk", summand_name(config.convention.risk)}}},
                {"frequencies", json::object()}};

  try {
    const auto prices =
        clock.time("ingest", [&] { return market_data::load_prices(config.prices, config.assets); });

    for (Frequency freq : config.frequencies) {
      const std::string fname = name_of(freq);
      const auto returns = clock.time("ingest", [&] { return market_data::to_log_returns(prices, freq); });
      const auto split = clock.time("ingest", [&] {
        return market_data::split(returns, {config.train_fraction, config.window.at(freq), freq});
      });
      const estimators::TestRange range{split.train_rows, split.test_rows};
      const Eigen::Index n = returns.assets();

      EstimateSet est = clock.time("estimate", [&] {
        EstimateSet e;
        e.sample = estimators::rolling_sample_estimates(returns.returns(), range, config.window.at(freq),
                                                        options.exec);
        bool need_dcc = false;
        std::set<std::string> externals;
        for (const auto& s : config.strategies) {
          if (s.cov == backtest::CovSource::dcc) need_dcc = true;
          if (s.mean == backtest::MeanSource::external) externals.insert(s.external);
        }
        if (need_dcc) {
          estimators::DccEgarchOptions o;
          o.refit_stride = config.dcc_refit_stride;
          o.expanding = config.dcc_expanding;
          e.dcc = estimators::rolling_dcc_egarch(returns.returns(), range, o, options.exec);
        }
        const std::vector<Date> test_dates(returns.dates().begin() + split.train_rows, returns.dates().end());
        for (const auto& name : externals) {
          e.external.emplace(name, estimators::load_forecasts(config.forecasts.at(name).at(freq), test_dates,
                                                              returns.asset_ids(), name));
        }
        return e;
      });

      if (est.dcc) {
        clock.time("estimate", [&] {
          json fits = json::array();
          for (const auto& f : est.dcc->fits) {
            json eg = json::array();
            for (const auto& g : f.egarch) eg.push_back(egarch_json(g));
            fits.push_back({{"step", f.step}, {"egarch", eg}, {"dcc", dcc_json(f.dcc)}});
          }
          json dump = {{"assets", returns.asset_ids()},
                       {"refit_stride", config.dcc_refit_stride},
                       {"window", config.dcc_expanding ? "expanding" : "rolling"},
                       {"fits", fits}};
          write_text(run_dir / "params" / fname / "dcc_egarch.json", dump.dump(2) + "\n");
          return 0;
        });
      }

      // Distinct (mean source, covariance source) estimate series, built once.
      std::map<std::string, std::vector<estimators::MomentEstimate>> series;
      clock.time("estimate", [&] {
        for (const auto& s : config.strategies) {
          const std::string key = mean_key(s) + "|" + std::string(backtest::to_string(s.cov));
          if (series.count(key)) continue;
          const auto& cov = s.cov == backtest::CovSource::dcc ? est.dcc->estimates : est.sample;
          series.emplace(key, backtest::compose_estimates(cov, means_for(mean_key(s), est, n)));
        }
        return 0;
      });

      struct Job {
        std::size_t strategy;
        backtest::StrategySpec spec;
        std::string key;
      };
      std::vector<Job> jobs;
      for (std::size_t k = 0; k < config.strategies.size(); ++k) {
        const auto& t = config.strategies[k];
        for (double g : config.gammas) {
          backtest::StrategySpec spec;
          spec.label = t.label;
          spec.framework = t.framework;
          spec.mean_source = t.mean;
          spec.external_name = t.external;
          spec.cov_source = t.cov;
          spec.gamma = g;
          spec.beta = config.beta;
          jobs.push_back({k, spec, mean_key(t) + "|" + std::string(backtest::to_string(t.cov))});
        }
      }

      std::vector<backtest::BacktestLedger> ledgers(jobs.size());
      const auto benchmark = clock.time("backtest", [&] {
        parallel_for(jobs.size(), options.exec, [&](std::size_t j) {
          ledgers[j] = backtest::run_backtest(returns, jobs[j].spec, split, series.at(jobs[j].key), config.solver);
        });
        return backtest::one_over_n_rebalanced(returns, split, config.beta);
      });

      json findex = {{"kappa", config.kappa.at(freq)}, {"test_rows", split.test_rows}};
      clock.time("backtest", [&] {
        const fs::path dir = run_dir / "ledgers" / fname;
        fs::create_directories(dir);
        backtest::write_ledger(benchmark, dir / "benchmark.csv");
        findex["benchmark"] = {{"file", "benchmark.csv"}, {"spec", strategy_json(benchmark.spec)}};
        json strategies = json::array();
        for (std::size_t k = 0; k < config.strategies.size(); ++k) {
          json entries = json::array();
          for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].strategy != k) continue;
            const std::string file = slug(jobs[j].spec.label) + "_g" + gamma_tag(jobs[j].spec.gamma) + ".csv";
            backtest::write_ledger(ledgers[j], dir / file);
            entries.push_back({{"file", file}, {"spec", strategy_json(jobs[j].spec)}});
            ++summary.ledgers;
          }
          strategies.push_back({{"label", config.strategies[k].label}, {"ledgers", entries}});
        }
        findex["strategies"] = strategies;
        return 0;
      });
      index["frequencies"][fname] = findex;

      const auto report = clock.time("evaluate", [&] {
        std::vector<evaluation::StrategyLedgers> grouped(config.strategies.size());
        for (std::size_t k = 0; k < config.strategies.size(); ++k) grouped[k].label = config.strategies[k].label;
        for (std::size_t j = 0; j < jobs.size(); ++j) grouped[jobs[j].strategy].ledgers.push_back(ledgers[j]);
        return evaluation::build_report(fname, grouped, benchmark, config.kappa.at(freq), config.convention);
      });

      clock.time("report", [&] {
        for (auto& p : write_report_files(run_dir, fname, report)) summary.reports.push_back(p);
        const Eigen::MatrixXd actual = returns.returns().bottomRows(split.test_rows);
        const fs::path diag = run_dir / "reports" / fname / "diagnostics.csv";
        write_text(diag, diagnostics_csv(est, actual));
        summary.reports.push_back(diag);
        return 0;
      });
    }

    clock.time("report", [&] {
      write_text(run_dir / "ledgers" / "index.json", index.dump(2) + "\n");
      json manifest = {{"version", kVersion},
                       {"config_sha256", sha256_hex(config.source_text)},
                       {"seed", config.seed},
                       {"threads", thread_count()},
                       {"versions",
                        {{"cryptofolio", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"compiler", __VERSION__}}},
                       {"timings_ms", clock.timings()},
                       {"files", file_hashes(run_dir)}};
      write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");
      return 0;
    });
  } catch (const StageError& e) {
    write_text(run_dir / "STALE", std::string("failed in ") + e.what() + "\n");
    throw;
  }
  fs::remove(run_dir / "STALE");
  return summary;
}

std::vector<fs::path> rerender_reports(const fs::path& run_dir) {
  const fs::path index_path = run_dir / "ledgers" / "index.json";
  const json index = json::parse(read_text(index_path));
  evaluation::MetricsConvention convention;
  convention.returns = summand_from(index.at("convention").at("returns").get<std::string>());
  convention.risk = summand_from(index.at("convention").at("risk").get<std::string>());

  std::vector<fs::path> out;
  for (const auto& [fname, findex] : index.at("frequencies").items()) {
    const fs::path dir = run_dir / "ledgers" / fname;
    const auto& b = findex.at("benchmark");
    const auto benchmark = backtest::read_ledger(dir / b.at("file").get<std::string>(), strategy_from(b.at("spec")));
    std::vector<evaluation::StrategyLedgers> grouped;
    for (const auto& s : findex.at("strategies")) {
      evaluation::StrategyLedgers g;
      g.label = s.at("label").get<std::string>();
      for (const auto& e : s.at("ledgers")) {
        g.ledgers.push_back(backtest::read_ledger(dir / e.at("file").get<std::string>(), strategy_from(e.at("spec"))));
      }
      grouped.push_back(std::move(g));
    }
    const auto report =
        evaluation::build_report(fname, grouped, benchmark, findex.at("kappa").get<double>(), convention);
    for (auto& p : write_report_files(run_dir, fname, report)) out.push_back(p);
  }

  const fs::path manifest_path = run_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    json manifest = json::parse(read_text(manifest_path));
    manifest["files"] = file_hashes(run_dir);
    write_text(manifest_path, manifest.dump(2) + "\n");
  }
  return out;
}

std::string stats_report(const RunConfig& config) {
  const auto prices = market_data::load_prices(config.prices, config.assets);
  std::ostringstream out;
  char line[256];
  for (Frequency f : config.frequencies) {
    const auto returns = market_data::to_log_returns(prices, f);
    const auto split = market_data::split(returns, {config.train_fraction, config.window.at(f), f});
    const auto& ids = returns.asset_ids();
    out << "== " << name_of(f) << " returns: " << returns.rows() << " observations, "
        << split.train_rows << " training, " << split.test_rows << " test\n\n";

    out << "Descriptive statistics\n";
    std::snprintf(line, sizeof(line), "%-8s %10s %10s %12s %10s %10s %10s %10s\n", "asset", "min", "max",
                  "growth %", "mean", "std", "skewness", "kurtosis");
    out << line;
    const auto stats = market_data::descriptive_stats(returns);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& s = stats[i];
      auto opt = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };
      std::snprintf(line, sizeof(line), "%-8s %10.4f %10.4f %12.2f %10.4f %10.4f %10.4f %10.4f\n", ids[i].c_str(),
                    s.min, s.max, s.growth_pct, s.mean, s.std_dev, opt(s.skewness), opt(s.kurtosis));
      out << line;
    }

    out << "\nStatistical tests (p-values in parentheses)\n";
    std::snprintf(line, sizeof(line), "%-8s %24s %24s\n", "asset", "Jarque-Bera", "ARCH(8)-LM");
    out << line;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Eigen::VectorXd col = returns.returns().col(static_cast<Eigen::Index>(i));
      const auto jb = market_data::jarque_bera(col);
      char jbs[64], lms[64];
      std::snprintf(jbs, sizeof(jbs), "%.2f (%.4f)", jb.statistic, jb.p_value);
      try {
        const auto lm = market_data::arch_lm(col, 8);
        std::snprintf(lms, sizeof(lms), "%.2f (%.4f)", lm.statistic, lm.p_value);
      } catch (const std::exception&) {
        std::snprintf(lms, sizeof(lms), "%s", "n/a");
      }
      std::snprintf(line, sizeof(line), "%-8s %24s %24s\n", ids[i].c_str(), jbs, lms);
      out << line;
    }

    out << "\nUnconditional correlations over the test range\n";
    const Eigen::MatrixXd corr = market_data::unconditional_correlation(returns, split.train_rows, split.test_rows);
    std::snprintf(line, sizeof(line), "%-8s", "");
    out << line;
    for (const auto& id : ids) {
      std::snprintf(line, sizeof(line), " %8s", id.c_str());
      out << line;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
      std::snprintf(line, sizeof(line), "%-8s", ids[static_cast<std::size_t>(i)].c_str());
      out << line;
      for (Eigen::Index j = 0; j < corr.cols(); ++j) {
        std::snprintf(line, sizeof(line), " %8.4f", corr(i, j));
        out << line;
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cryptofolio::pipeline
