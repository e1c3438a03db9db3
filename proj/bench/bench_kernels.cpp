// Serial reference kernels against their OpenMP counterparts.
#include "cryptofolio/moment_series.hpp"
#include "cryptofolio/optimizers.hpp"
#include "cryptofolio/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace cryptofolio;

namespace {

const market_data::ReturnPanel& panel() {
  static const market_data::ReturnPanel p = [] {
    simulation::GarchPanelSpec spec;
    spec.assets = 8;
    return market_data::to_log_returns(simulation::simulate_garch_prices(spec, 1),
                                       market_data::Frequency::daily);
  }();
  return p;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void rolling_moments(benchmark::State& state) {
  const auto& r = panel().returns();
  const estimators::TestRange range{2028, 870};
  for (auto _ : state) {
    auto est = estimators::rolling_sample_estimates(r, range, 182, exec_of(state));
    benchmark::DoNotOptimize(est.data());
  }
}
BENCHMARK(rolling_moments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void rolling_moments_streaming(benchmark::State& state) {
  const auto& r = panel().returns();
  for (auto _ : state) {
    auto est = estimators::rolling_sample_estimates_streaming(r, {2028, 870}, 182);
    benchmark::DoNotOptimize(est.data());
  }
}
BENCHMARK(rolling_moments_streaming)->Unit(benchmark::kMillisecond);

void grid_oracle(benchmark::State& state) {
  Eigen::MatrixXd sigma(3, 3);
  sigma << 0.004, 0.001, 0.0005, 0.001, 0.003, 0.0008, 0.0005, 0.0008, 0.006;
  Eigen::VectorXd mu(3), prev(3);
  mu << 0.002, -0.001, 0.0015;
  prev << 0.2, 0.5, 0.3;
  auto f = [&](const Eigen::VectorXd& w) { return optimizers::portfolio_objective(mu, sigma, 5, 0.005, prev, w); };
  for (auto _ : state) {
    auto g = optimizers::grid_oracle(f, 3, 0.002, exec_of(state));
    benchmark::DoNotOptimize(g.value);
  }
}
BENCHMARK(grid_oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void dcc_egarch_refits(benchmark::State& state) {
  const Eigen::MatrixXd r = panel().returns().leftCols(4).topRows(1040);
  estimators::DccEgarchOptions opt;
  opt.refit_stride = 5;
  opt.egarch.compute_std_errors = false;
  for (auto _ : state) {
    auto s = estimators::rolling_dcc_egarch(r, {1000, 40}, opt, exec_of(state));
    benchmark::DoNotOptimize(s.estimates.data());
  }
}
BENCHMARK(dcc_egarch_refits)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
