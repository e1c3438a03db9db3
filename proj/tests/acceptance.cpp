// Acceptance checks. One PASS/FAIL/SKIP line per criterion; exit status is
// non-zero when any criterion fails.
#include "cryptofolio/backtest.hpp"
#include "cryptofolio/evaluation.hpp"
#include "cryptofolio/moment_series.hpp"
#include "cryptofolio/pipeline.hpp"
#include "cryptofolio/simulation.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

using namespace cryptofolio;
namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Independent objective and optimality check in weight space.

struct Instance {
  VectorXd mu;
  MatrixXd sigma;
  double gamma = 1;
  double beta = 0;
  VectorXd prev;
};

double objective(const Instance& p, const double* w, Eigen::Index n) {
  double quad = 0, lin = 0, l1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) quad += w[i] * p.sigma(i, j) * w[j];
    lin += p.mu[i] * w[i];
    l1 += std::abs(w[i] - p.prev[i]);
  }
  return 0.5 * p.gamma * quad - lin + p.beta * l1;
}

// Every coordinate restricts the budget multiplier to an interval; the
// residual is how far the intersection is from being non-empty.
double weight_space_kkt(const Instance& p, const VectorXd& w) {
  const VectorXd d = p.gamma * (p.sigma * w) - p.mu;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double trade = w[i] - p.prev[i];
    if (w[i] <= 1e-12) {
      const double s = p.prev[i] > 1e-12 ? -1.0 : 1.0;
      hi = std::min(hi, d[i] + p.beta * s);
    } else if (std::abs(trade) > 1e-9) {
      const double v = d[i] + p.beta * (trade > 0 ? 1.0 : -1.0);
      lo = std::max(lo, v);
      hi = std::min(hi, v);
    } else {
      lo = std::max(lo, d[i] - p.beta);
      hi = std::min(hi, d[i] + p.beta);
    }
  }
  return std::max(0.0, lo - hi);
}

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
};

GridMin grid_min(const Instance& p, Eigen::Index n, int steps) {
  GridMin g;
  double w[3];
  if (n == 2) {
    for (int i = 0; i <= steps; ++i) {
      w[0] = static_cast<double>(i) / steps;
      w[1] = static_cast<double>(steps - i) / steps;
      g.value = std::min(g.value, objective(p, w, 2));
    }
  } else {
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps - i; ++j) {
        w[0] = static_cast<double>(i) / steps;
        w[1] = static_cast<double>(j) / steps;
        w[2] = static_cast<double>(steps - i - j) / steps;
        g.value = std::min(g.value, objective(p, w, 3));
      }
  }
  return g;
}

VectorXd random_simplex(std::mt19937_64& rng, Eigen::Index n) {
  std::exponential_distribution<double> e(1.0);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = e(rng);
  return v / v.sum();
}

// ---------------------------------------------------------------------------

Outcome criterion_solver_oracle() {
  using optimizers::Framework;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const double gammas[] = {1, 5, 10};
  const double betas[] = {0, 0.005, 0.05};
  int instances = 0, failures = 0;
  double worst_gap = -std::numeric_limits<double>::infinity(), worst_kkt = 0;
  std::string first_failure;
  for (Framework fw : {Framework::mv, Framework::mvc, Framework::gmv, Framework::gmvc}) {
    for (Eigen::Index n : {2, 3}) {
      const int count = n == 2 ? 100 : 50;
      for (int k = 0; k < count; ++k) {
        Instance p;
        p.sigma = test_support::random_covariance(rng, n, 1e-4, 1e-2);
        p.mu = optimizers::uses_mean(fw) ? test_support::random_vector(rng, n, -0.01, 0.01)
                                         : VectorXd::Zero(n);
        p.gamma = gammas[k % 3];
        p.beta = optimizers::penalized(fw) ? betas[(k / 3) % 3] : 0.0;
        p.prev = optimizers::penalized(fw) ? random_simplex(rng, n) : VectorXd::Zero(n);
        if (optimizers::penalized(fw) && k % 10 == 9) p.prev.setZero();  // first rebalance

        optimizers::SolveReport sol;
        switch (fw) {
          case Framework::mv: sol = optimizers::solve_mv(p.mu, p.sigma, p.gamma); break;
          case Framework::mvc: sol = optimizers::solve_mvc(p.mu, p.sigma, p.gamma, p.beta, p.prev); break;
          case Framework::gmv: sol = optimizers::solve_gmv(p.sigma, p.gamma); break;
          default: sol = optimizers::solve_gmvc(p.sigma, p.gamma, p.beta, p.prev); break;
        }
        const double lipschitz = optimizers::objective_lipschitz_bound(p.mu, p.sigma, p.gamma, p.beta);
        const double f = objective(p, sol.weights.data(), n);
        const double g = grid_min(p, n, 1000).value;
        const double kkt = std::max(weight_space_kkt(p, sol.weights), sol.kkt_residual);
        const bool feasible = (sol.weights.array() >= -1e-12).all() && std::abs(sol.weights.sum() - 1) < 1e-10;
        ++instances;
        worst_gap = std::max(worst_gap, (f - g) / lipschitz);
        worst_kkt = std::max(worst_kkt, kkt);
        if (!(f <= g + lipschitz * 1e-3) || !(kkt <= 1e-8) || !feasible) {
          if (failures++ == 0) {
            first_failure = std::string(optimizers::to_string(fw)) + " N=" + std::to_string(n) + " #" +
                            std::to_string(k) + " kkt=" + fmt("%.3g", kkt);
          }
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  o.detail = std::to_string(instances) + " instances, max (f - grid)/L " + fmt("%.3g", worst_gap) +
             ", max KKT " + fmt("%.3g", worst_kkt) + ", " + fmt("%.1f", secs) + " s";
  if (failures) o.detail += ", " + std::to_string(failures) + " failed (first: " + first_failure + ")";
  if (secs > 300) o.detail += ", over the 5 minute budget";
  o.status = failures == 0 && secs <= 300 ? Status::pass : Status::fail;
  return o;
}

Outcome criterion_shifted_mean() {
  std::mt19937_64 rng(202);
  optimizers::SolverOptions equality_only;
  equality_only.long_only = false;
  const double gammas[] = {1, 5, 10};
  const double betas[] = {0.005, 0.05};
  double worst = 0;
  int bad_g = 0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index n = 2 + k % 5;
    // Strictly PD: correlation draw plus a diagonal floor.
    MatrixXd sigma = test_support::random_covariance(rng, n, 1e-4, 1e-2);
    sigma.diagonal().array() += 1e-5;
    const VectorXd mu = test_support::random_vector(rng, n, -0.01, 0.01);
    const VectorXd prev = random_simplex(rng, n);
    const double gamma = gammas[k % 3], beta = betas[k % 2];
    const auto sol = optimizers::solve_mvc(mu, sigma, gamma, beta, prev, equality_only);
    const VectorXd g = sol.turnover_subgradient;
    if (g.cwiseAbs().maxCoeff() > 1 + 1e-9) ++bad_g;

    // Budget-constrained closed form with mu - beta g.
    const VectorXd shifted = mu - beta * g;
    const Eigen::LDLT<MatrixXd> ldlt(sigma);
    const VectorXd a = ldlt.solve(shifted);
    const VectorXd b = ldlt.solve(VectorXd::Ones(n));
    const double lambda = (a.sum() - gamma) / b.sum();
    const VectorXd w_tilde = (a - lambda * b) / gamma;
    const VectorXd w_lib = optimizers::closed_form_mv(optimizers::shifted_mean(mu, beta, g), sigma, gamma);
    worst = std::max({worst, (w_tilde - sol.weights).cwiseAbs().maxCoeff(),
                      (w_lib - sol.weights).cwiseAbs().maxCoeff()});
  }
  Outcome o;
  o.detail = "50 instances, max |w_mvc - w_shifted| " + fmt("%.3g", worst);
  if (bad_g) o.detail += ", " + std::to_string(bad_g) + " subgradients outside [-1, 1]";
  o.status = worst <= 1e-8 && bad_g == 0 ? Status::pass : Status::fail;
  return o;
}

Outcome criterion_fee_identities() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> z;
  double worst_self = 0, worst_gap = 0;
  int order_violations = 0, real = 0, total = 0;
  for (int g = 1; g <= 10; ++g) {
    std::vector<double> x(300);
    for (auto& v : x) v = 1 + 0.03 * z(rng);
    const auto f = evaluation::performance_fee(x, x, g);
    worst_self = std::max(worst_self, f.real ? std::abs(f.phi2) : 1.0);
  }
  for (int k = 0; k < 100; ++k) {
    std::vector<double> s(250), b(250);
    const double edge = 0.002 * z(rng);
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double common = 0.04 * z(rng);
      s[t] = 1 + edge + common + 0.02 * z(rng);
      b[t] = 1 + common + 0.01 * z(rng);
    }
    for (int g = 1; g <= 10; ++g) {
      ++total;
      const auto f = evaluation::performance_fee(s, b, g);
      if (!f.real) continue;
      ++real;
      const double a = g / (2.0 * (1 + g));
      double du = 0;
      for (std::size_t t = 0; t < s.size(); ++t) {
        const double charged = s[t] - f.phi2;
        du += (charged - a * charged * charged) - (b[t] - a * b[t] * b[t]);
      }
      du /= static_cast<double>(s.size());
      worst_gap = std::max(worst_gap, std::abs(du));
      if (f.phi1 > f.phi2) ++order_violations;
    }
  }
  Outcome o;
  o.detail = "self fee max |phi2| " + fmt("%.3g", worst_self) + ", max |dU(phi2)| " + fmt("%.3g", worst_gap) +
             " over " + std::to_string(real) + "/" + std::to_string(total) + " real cases, phi1 > phi2 in " +
             std::to_string(order_violations);
  o.status = worst_self <= 1e-12 && worst_gap <= 1e-10 && order_violations == 0 && real > 0 ? Status::pass
                                                                                             : Status::fail;
  return o;
}

market_data::ReturnPanel synthetic_returns(std::uint64_t seed, Eigen::Index days, Eigen::Index assets,
                                           market_data::Frequency f = market_data::Frequency::daily) {
  simulation::GarchPanelSpec spec;
  spec.assets = assets;
  spec.days = days;
  return market_data::to_log_returns(simulation::simulate_garch_prices(spec, seed), f);
}

Outcome criterion_ledger() {
  using optimizers::Framework;
  const auto panel = synthetic_returns(404, 1251, 4);
  const market_data::Split split{250, 1000};
  const auto sample = estimators::rolling_sample_estimates(panel.returns(), {250, 1000}, 120);
  const MatrixXd simple = panel.returns().array().exp() - 1.0;
  std::mt19937_64 rng(4);
  std::vector<VectorXd> zero(1000, VectorXd::Zero(4)), noise(1000);
  for (auto& m : noise) m = test_support::random_vector(rng, 4, -0.05, 0.05);
  const auto zero_est = backtest::compose_estimates(sample, zero);
  const auto noise_est = backtest::compose_estimates(sample, noise);

  double worst_wealth = 0, worst_turnover = 0, worst_net = 0;
  int cost_mismatch = 0, first_bad = 0, invariance_bad = 0;
  for (Framework fw : {Framework::mv, Framework::mvc, Framework::gmv, Framework::gmvc}) {
    backtest::StrategySpec spec;
    spec.label = std::string(optimizers::to_string(fw));
    spec.framework = fw;
    spec.gamma = 3;
    const auto ledger = backtest::run_backtest(panel, spec, split, sample);
    if (std::abs(ledger.steps.front().turnover - 1.0) > 1e-12) ++first_bad;
    double wealth = 1;
    VectorXd pre = VectorXd::Zero(4);
    for (const auto& st : ledger.steps) {
      const VectorXd r = simple.row(st.row).transpose();
      worst_turnover = std::max({worst_turnover, std::abs(st.turnover - (st.target - pre).cwiseAbs().sum()),
                                 (st.pre_trade - pre).cwiseAbs().maxCoeff()});
      if (st.cost != spec.beta * st.turnover) ++cost_mismatch;
      const double gross = st.target.dot(r);
      worst_net = std::max(worst_net, std::abs((1 + st.net_return) - (1 - st.cost) * (1 + gross)));
      wealth *= 1 + st.net_return;
      worst_wealth = std::max(worst_wealth, std::abs(st.wealth - wealth) / wealth);
      const VectorXd grown = st.target.array() * (1 + r.array());
      pre = grown / grown.sum();
    }
    if (fw == Framework::gmv || fw == Framework::gmvc) {
      for (const auto* est : {&zero_est, &noise_est}) {
        const auto other = backtest::run_backtest(panel, spec, split, *est);
        for (std::size_t s = 0; s < other.steps.size(); ++s) {
          if (other.steps[s].target != ledger.steps[s].target || other.steps[s].net_return != ledger.steps[s].net_return) {
            ++invariance_bad;
            break;
          }
        }
      }
    }
  }
  Outcome o;
  o.detail = "4 x 1000 steps, wealth rel err " + fmt("%.3g", worst_wealth) + ", turnover/drift err " +
             fmt("%.3g", worst_turnover) + ", net err " + fmt("%.3g", worst_net) + ", cost mismatches " +
             std::to_string(cost_mismatch) + ", first-turnover errors " + std::to_string(first_bad) +
             ", GMV mean-provider differences " + std::to_string(invariance_bad);
  o.status = worst_wealth <= 1e-10 && worst_turnover <= 1e-12 && worst_net <= 1e-12 && cost_mismatch == 0 &&
                     first_bad == 0 && invariance_bad == 0
                 ? Status::pass
                 : Status::fail;
  return o;
}

Outcome criterion_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const estimators::EgarchParams truth{0.0005, -0.25, -0.05, 0.20, 0.96, 6.0};
  estimators::EgarchFitOptions fast;
  fast.compute_std_errors = false;
  int hits = 0;
  std::string betas;
  for (int path = 0; path < 10; ++path) {
    const VectorXd x = simulation::simulate_egarch(truth, 10000, 500 + path);
    const auto fit = estimators::fit_egarch(x, fast);
    const bool ok = std::abs(fit.params.beta1 - truth.beta1) <= 0.03 &&
                    std::abs(fit.params.alpha2 - truth.alpha2) <= 0.05;
    hits += ok;
    betas += (path ? " " : "") + fmt("%.3f", fit.params.beta1) + "/" + fmt("%.3f", fit.params.alpha2);
  }

  MatrixXd target(3, 3);
  target << 1, 0.6, 0.4, 0.6, 1, 0.5, 0.4, 0.5, 1;
  double worst_persistence = 0;
  for (int path = 0; path < 3; ++path) {
    const MatrixXd v = simulation::simulate_dcc_residuals(0.05, 0.90, target, 5000, 900 + path);
    const auto fit = estimators::fit_dcc(v);
    worst_persistence = std::max(worst_persistence, std::abs(fit.params.a + fit.params.b - 0.95));
  }

  // Forecast validity over a rolling DCC-EGARCH run.
  const auto panel = synthetic_returns(505, 761, 4);
  estimators::DccEgarchOptions opt;
  opt.refit_stride = 15;
  const auto series = estimators::rolling_dcc_egarch(panel.returns(), {600, 160}, opt);
  double worst_diag = 0, worst_eig = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < series.estimates.size(); ++s) {
    worst_diag = std::max(worst_diag, (series.correlations[s].diagonal().array() - 1).abs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(series.estimates[s].cov(), Eigen::EigenvaluesOnly);
    worst_eig = std::min(worst_eig, eig.eigenvalues().minCoeff());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  o.detail = "EGARCH " + std::to_string(hits) + "/10 paths in tolerance (beta1/alpha2: " + betas +
             "), DCC max |a+b-0.95| " + fmt("%.3f", worst_persistence) + ", forecast max |diag-1| " +
             fmt("%.2g", worst_diag) + ", min eigenvalue " + fmt("%.3g", worst_eig) + ", " + fmt("%.0f", secs) + " s";
  o.status = hits >= 8 && worst_persistence <= 0.10 && worst_diag <= 1e-12 && worst_eig >= 0.0 && secs <= 600
                 ? Status::pass
                 : Status::fail;
  return o;
}

Outcome criterion_reference_data() {
  const char* path = std::getenv("CRYPTOFOLIO_PRICES");
  if (!path || !*path) {
    return {Status::skip, "set CRYPTOFOLIO_PRICES to a date,BTC,ETH,XRP,LTC close file (2015-08-07..2023-07-14)"};
  }
  using market_data::Frequency;
  const auto prices = market_data::load_prices(path, {"BTC", "ETH", "XRP", "LTC"});
  const auto daily = market_data::to_log_returns(prices, Frequency::daily);
  const auto weekly = market_data::to_log_returns(prices, Frequency::weekly);
  std::vector<std::string> misses;
  auto near = [&](const std::string& what, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) misses.push_back(what + " " + fmt("%.6g", got) + " vs " + fmt("%.6g", want));
  };
  if (daily.rows() != 2898) misses.push_back("daily rows " + std::to_string(daily.rows()));
  if (weekly.rows() != 414) misses.push_back("weekly rows " + std::to_string(weekly.rows()));

  const double daily_mean[] = {0.001617, 0.002260, 0.001546, 0.001076};
  const double daily_sd[] = {0.03816, 0.06230, 0.06546, 0.05389};
  const double weekly_mean[] = {0.01132, 0.01582, 0.01082, 0.00753};
  const double weekly_sd[] = {0.1011, 0.1564, 0.1717, 0.1394};
  const auto ds = market_data::descriptive_stats(daily);
  const auto ws = market_data::descriptive_stats(weekly);
  const char* ids[] = {"BTC", "ETH", "XRP", "LTC"};
  for (int i = 0; i < 4; ++i) {
    near(std::string("daily mean ") + ids[i], ds[i].mean, daily_mean[i], 5e-5);
    near(std::string("daily sd ") + ids[i], ds[i].std_dev, daily_sd[i], 5e-5);
    near(std::string("weekly mean ") + ids[i], ws[i].mean, weekly_mean[i], 5e-5);
    near(std::string("weekly sd ") + ids[i], ws[i].std_dev, weekly_sd[i], 5e-5);
  }

  const auto split = market_data::split(daily, {0.7, 182, Frequency::daily});
  const MatrixXd corr = market_data::unconditional_correlation(daily, split.train_rows, split.test_rows);
  near("BTC-ETH correlation", corr(0, 1), 0.8467, 0.001);

  const auto est = estimators::rolling_sample_estimates(daily.returns(), {split.train_rows, split.test_rows}, 182);
  MatrixXd means(split.test_rows, 4);
  std::vector<MatrixXd> covs;
  for (std::size_t s = 0; s < est.size(); ++s) {
    means.row(static_cast<Eigen::Index>(s)) = est[s].mean().transpose();
    covs.push_back(est[s].cov());
  }
  near("SM RMSE", evaluation::aggregate_rmse(means, daily.returns().bottomRows(split.test_rows)), 0.0477, 0.0005);
  near("SM VL", evaluation::variation_level_mean(means), 0.0006, 0.0001);
  near("sample cov VL", evaluation::variation_level_cov(covs), 0.0001, 0.0001);

  // Directional: the turnover penalty lowers costs for the sample-moment strategies.
  auto mean_cost = [&](optimizers::Framework fw) {
    double total = 0;
    for (int g = 1; g <= 10; ++g) {
      backtest::StrategySpec spec;
      spec.label = "x";
      spec.framework = fw;
      spec.gamma = g;
      total += backtest::run_backtest(daily, spec, split, est).total_cost();
    }
    return total / 10;
  };
  if (!(mean_cost(optimizers::Framework::mvc) < mean_cost(optimizers::Framework::mv))) misses.push_back("TC(MVC) >= TC(MV)");
  if (!(mean_cost(optimizers::Framework::gmvc) < mean_cost(optimizers::Framework::gmv))) misses.push_back("TC(GMVC) >= TC(GMV)");

  Outcome o;
  o.status = misses.empty() ? Status::pass : Status::fail;
  o.detail = misses.empty() ? "counts, moments, correlation, RMSE and variation levels match" : "";
  for (std::size_t k = 0; k < misses.size(); ++k) o.detail += (k ? "; " : "") + misses[k];
  return o;
}

Outcome criterion_turnover_penalty() {
  using optimizers::Framework;
  simulation::GarchPanelSpec spec;  // 4 assets, 2899 closes
  const auto prices = simulation::simulate_garch_prices(spec, 707);
  struct Costs {
    double mv = 0, mvc = 0, gmv = 0, gmvc = 0;
  };
  std::vector<std::string> problems;
  Costs avg[2];
  int fi = 0;
  for (auto f : {market_data::Frequency::daily, market_data::Frequency::weekly}) {
    const auto panel = market_data::to_log_returns(prices, f);
    const int window = market_data::SplitSpec::default_window(f);
    const auto split = market_data::split(panel, {0.7, window, f});
    const auto est = estimators::rolling_sample_estimates(panel.returns(), {split.train_rows, split.test_rows}, window);
    for (int g = 1; g <= 10; ++g) {
      auto cost = [&](Framework fw) {
        backtest::StrategySpec s;
        s.label = std::string(optimizers::to_string(fw));
        s.framework = fw;
        s.gamma = g;
        return backtest::run_backtest(panel, s, split, est).total_cost();
      };
      const Costs c{cost(Framework::mv), cost(Framework::mvc), cost(Framework::gmv), cost(Framework::gmvc)};
      const std::string tag = std::string(market_data::to_string(f)) + " gamma " + std::to_string(g);
      if (!(c.mvc < c.mv)) problems.push_back(tag + " MVC >= MV");
      if (!(c.gmvc < c.gmv)) problems.push_back(tag + " GMVC >= GMV");
      avg[fi].mv += c.mv / 10;
      avg[fi].mvc += c.mvc / 10;
      avg[fi].gmv += c.gmv / 10;
      avg[fi].gmvc += c.gmvc / 10;
    }
    ++fi;
  }
  const double mv_daily = 1 - avg[0].mvc / avg[0].mv, mv_weekly = 1 - avg[1].mvc / avg[1].mv;
  const double gmv_daily = 1 - avg[0].gmvc / avg[0].gmv, gmv_weekly = 1 - avg[1].gmvc / avg[1].gmv;
  if (!(mv_daily > mv_weekly)) problems.push_back("MV reduction not larger daily");
  if (!(gmv_daily > gmv_weekly)) problems.push_back("GMV reduction not larger daily");
  Outcome o;
  o.detail = "TC reduction daily/weekly: MV " + fmt("%.3f", mv_daily) + "/" + fmt("%.3f", mv_weekly) + ", GMV " +
             fmt("%.3f", gmv_daily) + "/" + fmt("%.3f", gmv_weekly);
  for (const auto& p : problems) o.detail += "; " + p;
  o.status = problems.empty() ? Status::pass : Status::fail;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion_determinism() {
  const auto dir = test_support::scratch_dir("acceptance_determinism");
  simulation::GarchPanelSpec spec;
  spec.assets = 3;
  spec.days = 801;
  simulation::write_prices(simulation::simulate_garch_prices(spec, 808), dir / "prices.csv");
  const std::string text = R"({
    "prices": "prices.csv",
    "frequencies": ["daily", "weekly"],
    "window": {"daily": 60, "weekly": 12},
    "gammas": [1, 4, 7, 10],
    "strategies": [
      {"label": "MV", "framework": "mv"},
      {"label": "MVC", "framework": "mvc"},
      {"label": "GMV", "framework": "gmv", "mean": "zero"},
      {"label": "GMVC", "framework": "gmvc", "mean": "zero"}
    ]
  })";
  std::ofstream(dir / "config.json") << text;
  auto first = pipeline::load_config(dir / "config.json");
  first.output_dir = dir / "first";
  auto second = first;
  second.output_dir = dir / "second";
  pipeline::run(first, {Exec::parallel});
  pipeline::run(second, {Exec::parallel});
  auto third = first;
  third.output_dir = dir / "serial";
  pipeline::run(third, {Exec::serial});

  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "first" / "reports")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "first");
    ++files;
    const std::string a = slurp(e.path());
    if (a != slurp(dir / "second" / rel) || a != slurp(dir / "serial" / rel)) ++differ;
  }
  Outcome o;
  o.detail = std::to_string(files) + " report files compared across two parallel runs and one serial run, " +
             std::to_string(differ) + " differ";
  o.status = files > 0 && differ == 0 ? Status::pass : Status::fail;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"solver matches grid oracle", criterion_solver_oracle},
      {"shifted-mean equivalence", criterion_shifted_mean},
      {"performance-fee identities", criterion_fee_identities},
      {"ledger identities", criterion_ledger},
      {"EGARCH/DCC recovery", criterion_recovery},
      {"real-data reference values", criterion_reference_data},
      {"turnover penalty lowers costs", criterion_turnover_penalty},
      {"deterministic reports", criterion_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    std::printf("%s %zu %s: %s\n", tag, k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.status == Status::fail;
  }
  return failed ? 1 : 0;
}
