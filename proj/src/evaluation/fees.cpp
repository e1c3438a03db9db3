#include "cryptofolio/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cryptofolio::evaluation {

namespace {

void check_pair(std::span<const double> strategy, std::span<const double> benchmark, double gamma) {
  if (strategy.empty()) throw std::invalid_argument("performance fee needs at least one period");
  if (strategy.size() != benchmark.size()) {
    throw std::invalid_argument("performance fee: series lengths differ (" +
                                std::to_string(strategy.size()) + " vs " +
                                std::to_string(benchmark.size()) + ")");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
}

}  // namespace

FeeResult performance_fee(std::span<const double> strategy, std::span<const double> benchmark,
                          double gamma) {
  check_pair(strategy, benchmark, gamma);
  const double q = static_cast<double>(strategy.size());
  const double k = (1.0 + gamma) / gamma;
  double mean_star = 0.0;
  double mean_diff = 0.0;
  double mean_sq_diff = 0.0;
  for (std::size_t t = 0; t < strategy.size(); ++t) {
    mean_star += strategy[t];
    mean_diff += strategy[t] - benchmark[t];
    mean_sq_diff += benchmark[t] * benchmark[t] - strategy[t] * strategy[t];
  }
  mean_star /= q;
  mean_diff /= q;
  mean_sq_diff /= q;

  FeeResult f;
  f.b = 2.0 * (mean_star - k);
  f.c = 2.0 * k * mean_diff + mean_sq_diff;
  f.discriminant = f.b * f.b + 4.0 * f.c;
  if (f.discriminant < 0.0) {
    f.real = false;
    f.phi1 = f.phi2 = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  // Roots of phi^2 - B phi - C = 0; the larger-magnitude root first, the
  // other from the product -C, which avoids cancellation.
  const double root = std::sqrt(f.discriminant);
  if (f.b >= 0.0) {
    f.phi2 = 0.5 * (f.b + root);
    f.phi1 = f.phi2 != 0.0 ? -f.c / f.phi2 : 0.0;
  } else {
    f.phi1 = 0.5 * (f.b - root);
    f.phi2 = -f.c / f.phi1;
  }
  return f;
}

std::vector<double> gross_factors(const backtest::BacktestLedger& ledger) {
  std::vector<double> out;
  out.reserve(ledger.steps.size());
  for (const auto& s : ledger.steps) out.push_back(1.0 + s.net_return);
  return out;
}

double utility_gap(std::span<const double> strategy, std::span<const double> benchmark, double gamma,
                   double fee) {
  check_pair(strategy, benchmark, gamma);
  const double a = gamma / (2.0 * (1.0 + gamma));
  double gap = 0.0;
  for (std::size_t t = 0; t < strategy.size(); ++t) {
    const double charged = strategy[t] - fee;
    gap += (charged - a * charged * charged) - (benchmark[t] - a * benchmark[t] * benchmark[t]);
  }
  return gap / static_cast<double>(strategy.size()) / a;
}

std::optional<double> average_annualized_pf(std::span<const FeeResult> fees, double kappa) {
  if (fees.empty()) throw std::invalid_argument("average_annualized_pf: no fees");
  double total = 0.0;
  for (const auto& f : fees) {
    if (!f.real) return std::nullopt;
    total += kappa * f.phi2;
  }
  return total / static_cast<double>(fees.size());
}

}  // namespace cryptofolio::evaluation
