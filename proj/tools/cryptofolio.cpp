// Batch front end: validate, run, report, stats.

#include "cryptofolio/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace pl = cryptofolio::pipeline;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;

int cmd_validate(const std::string& path) {
  const auto config = pl::load_config(path);
  const auto diags = pl::validate(config);
  for (const auto& d : diags) std::cerr << d.field << ": " << d.message << '\n';
  if (!diags.empty()) return kInvalid;
  std::cout << "config OK\n";
  return kOk;
}

int cmd_run(const std::string& path, const std::string& output, int threads, bool serial) {
  auto config = pl::load_config(path);
  if (!output.empty()) config.output_dir = output;
  if (threads >= 0) config.threads = threads;
  const auto diags = pl::validate(config);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d.field << ": " << d.message << '\n';
    return kInvalid;
  }
  pl::RunOptions opts;
  opts.exec = serial ? cryptofolio::Exec::serial : cryptofolio::Exec::parallel;
  const auto summary = pl::run(config, opts);
  std::cout << summary.ledgers << " ledgers, " << summary.reports.size() << " report files in "
            << summary.run_dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-variance portfolio backtests with turnover penalties"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string run_dir;
  int threads = -1;
  bool serial = false;

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "JSON run configuration")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("config", config_path, "JSON run configuration")->required();
  run->add_option("-o,--output", output, "Run directory (overrides output_dir)");
  run->add_option("-j,--threads", threads, "Worker threads, 0 for the runtime default");
  run->add_flag("--serial", serial, "Use the serial reference kernels");

  auto* report = app.add_subcommand("report", "Re-render report tables from stored ledgers");
  report->add_option("run_dir", run_dir, "Directory of a finished run")->required();

  auto* stats = app.add_subcommand("stats", "Descriptive statistics, tests and correlations");
  stats->add_option("config", config_path, "JSON run configuration")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config_path);
    if (*run) return cmd_run(config_path, output, threads, serial);
    if (*report) {
      for (const auto& p : pl::rerender_reports(run_dir)) std::cout << p.string() << '\n';
      return kOk;
    }
    if (*stats) {
      std::cout << pl::stats_report(pl::load_config(config_path));
      return kOk;
    }
  } catch (const pl::ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kInvalid;
  } catch (const pl::StageError& e) {
    std::cerr << "stage " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kFailed;
}
