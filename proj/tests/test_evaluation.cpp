#include "cryptofolio/evaluation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cryptofolio;
using namespace cryptofolio::evaluation;

namespace {

// Mean quadratic utility of gross factors with risk aversion gamma.
double mean_utility(const std::vector<double>& x, double gamma, double fee = 0.0) {
  const double a = gamma / (2 * (1 + gamma));
  double u = 0;
  for (double v : x) u += (v - fee) - a * (v - fee) * (v - fee);
  return u / static_cast<double>(x.size());
}

// Root of the utility-matching condition by bisection on [lo, hi].
double bisect_fee(const std::vector<double>& s, const std::vector<double>& b, double gamma, double lo,
                  double hi) {
  auto g = [&](double f) { return mean_utility(s, gamma, f) - mean_utility(b, gamma); };
  double glo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0) == (glo < 0)) lo = mid, glo = gm;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

backtest::BacktestLedger ledger_of(const std::string& label, double gamma, std::vector<double> net,
                                   std::vector<double> cost) {
  backtest::BacktestLedger l;
  l.spec.label = label;
  l.spec.gamma = gamma;
  for (std::size_t t = 0; t < net.size(); ++t) {
    backtest::LedgerStep s;
    s.net_return = net[t];
    s.cost = cost[t];
    s.gross_return = (1 + net[t]) / (1 - cost[t]) - 1;
    l.steps.push_back(s);
  }
  return l;
}

}  // namespace

TEST_CASE("fee for a two-period example against an independent root search") {
  const std::vector<double> star{1.02, 0.99}, bench{1.0, 1.0};
  const auto f = performance_fee(star, bench, 5.0);
  REQUIRE(f.real);
  CHECK(f.b == doctest::Approx(2 * (1.005 - 1.2)));
  CHECK(f.phi2 == doctest::Approx(bisect_fee(star, bench, 5.0, -0.1, 0.1)).epsilon(1e-10));
  CHECK(f.phi1 == doctest::Approx(bisect_fee(star, bench, 5.0, -2.0, -0.1)).epsilon(1e-10));
  CHECK(f.phi1 * f.phi2 == doctest::Approx(-f.c));
  CHECK(f.phi1 + f.phi2 == doctest::Approx(f.b));
}

TEST_CASE("utility gap equals the fee quadratic") {
  std::mt19937_64 rng(4);
  const Eigen::VectorXd s = test_support::random_vector(rng, 50, 0.95, 1.06);
  const Eigen::VectorXd b = test_support::random_vector(rng, 50, 0.96, 1.04);
  const std::vector<double> star(s.data(), s.data() + s.size()), bench(b.data(), b.data() + b.size());
  for (double gamma : {1.0, 4.0, 10.0}) {
    const auto f = performance_fee(star, bench, gamma);
    const double a = gamma / (2 * (1 + gamma));
    for (double fee : {-0.01, 0.0, 0.003}) {
      const double direct = (mean_utility(star, gamma, fee) - mean_utility(bench, gamma)) / a;
      CHECK(utility_gap(star, bench, gamma, fee) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(utility_gap(star, bench, gamma, fee) == doctest::Approx(-fee * fee + f.b * fee + f.c).epsilon(1e-10));
    }
    CHECK(std::abs(utility_gap(star, bench, gamma, f.phi2)) < 1e-12);
    CHECK(std::abs(utility_gap(star, bench, gamma, f.phi1)) < 1e-10);
  }
}

TEST_CASE("identical series give a zero fee") {
  const std::vector<double> x{1.01, 0.98, 1.03};
  const auto f = performance_fee(x, x, 3.0);
  CHECK(f.phi2 == 0.0);
  CHECK(f.c == 0.0);
}

TEST_CASE("negative discriminant leaves the fee undefined") {
  const std::vector<double> star{0.2, 2.2}, bench{1.2, 1.2};
  const auto f = performance_fee(star, bench, 5.0);
  CHECK_FALSE(f.real);
  CHECK(std::isnan(f.phi2));
  const std::vector<FeeResult> fees{performance_fee(bench, bench, 5.0), f};
  CHECK_FALSE(average_annualized_pf(fees, 365).has_value());
}

TEST_CASE("annualized average fee") {
  std::vector<FeeResult> fees(2);
  fees[0].phi2 = 0.001;
  fees[1].phi2 = -0.0004;
  CHECK(*average_annualized_pf(fees, 52) == doctest::Approx(52 * 0.0003));
  CHECK_THROWS(performance_fee(std::vector<double>{1.0}, std::vector<double>{1.0, 1.0}, 1.0));
}

TEST_CASE("aggregate metrics average per-gamma totals") {
  const auto a = ledger_of("x", 1, {0.01, -0.02}, {0.005, 0.0});
  const auto b = ledger_of("x", 2, {0.03, 0.00}, {0.001, 0.002});
  const std::vector<backtest::BacktestLedger> both{a, b};
  const auto m = aggregate_metrics(both);
  CHECK(m.net_return == doctest::Approx((0.01 - 0.02 + 0.03) / 2));
  CHECK(m.risk == doctest::Approx((1e-4 + 4e-4 + 9e-4) / 2));
  CHECK(m.costs == doctest::Approx(0.008 / 2));
  CHECK(m.gross_return == doctest::Approx((a.total_gross_return() + b.total_gross_return()) / 2));

  const auto p = aggregate_metrics(both, {Summand::one_plus, Summand::one_plus});
  CHECK(p.net_return == doctest::Approx(2 + 0.01));
  CHECK(p.risk == doctest::Approx((1.01 * 1.01 + 0.98 * 0.98 + 1.03 * 1.03 + 1.0) / 2));

  const std::vector<backtest::BacktestLedger> uneven{a, ledger_of("x", 3, {0.0}, {0.0})};
  CHECK_THROWS(aggregate_metrics(uneven));
}

TEST_CASE("forecast accuracy and variation levels") {
  Eigen::MatrixXd f(2, 2), y(2, 2);
  f << 1, 2, 3, 4;
  y << 1, 1, 1, 1;
  CHECK(aggregate_rmse(f, y) == doctest::Approx(std::sqrt((1 + 4 + 9) / 4.0)));

  Eigen::MatrixXd m(3, 2);
  m << 0, 0, 0.3, 0.4, 0.3, 0.4;
  CHECK(variation_level_mean(m) == doctest::Approx(0.5 / 2));
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 0.3, 0.4;
  CHECK(variation_level_mean(two) == doctest::Approx(0.5));

  const std::vector<Eigen::MatrixXd> covs{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  CHECK(variation_level_cov(covs) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS(variation_level_mean(Eigen::MatrixXd::Zero(1, 2)));
}

TEST_CASE("report build, JSON round-trip and renderings") {
  const auto bench = ledger_of("1/N", 1, {0.01, -0.01, 0.02}, {0.005, 0.0001, 0.0001});
  StrategyLedgers good{"MV", {ledger_of("MV", 1, {0.02, -0.005, 0.03}, {0.005, 0.001, 0.001}),
                              ledger_of("MV", 2, {0.015, 0.0, 0.02}, {0.005, 0.001, 0.001})}};
  StrategyLedgers wild{"Wild", {ledger_of("Wild", 1, {-0.8, 1.2, -0.8}, {0, 0, 0})}};
  const auto report = build_report("daily", {good, wild}, bench, 365);
  CHECK(report.test_rows == 3);
  REQUIRE(report.strategies.size() == 2);
  CHECK(report.strategies[0].gammas == std::vector<double>{1, 2});
  CHECK(report.strategies[0].positive);

  const std::string json = report_to_json(report);
  const auto back = report_from_json(json);
  CHECK(back == report);
  CHECK(report_to_json(back) == json);

  const std::string metrics = metrics_csv(report);
  CHECK(metrics.rfind("label,net_return,risk,gross_return,costs\n1/N,", 0) == 0);
  const std::string fees = fees_csv(report);
  CHECK(fees.find("phi2_g1,phi2_g2") != std::string::npos);
  const std::string text = render_text(report);
  CHECK(text.find("MV") != std::string::npos);
  CHECK(text.find(" +") != std::string::npos);

  StrategyLedgers shorter{"S", {ledger_of("S", 1, {0.0}, {0.0})}};
  CHECK_THROWS(build_report("daily", {shorter}, bench, 365));
}
