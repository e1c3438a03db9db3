#include "cryptofolio/simulation.hpp"

#include "cryptofolio/csv.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace cryptofolio::simulation {

namespace {

double standardized_t(std::mt19937_64& rng, double nu) {
  std::student_t_distribution<double> dist(nu);
  return dist(rng) * std::sqrt((nu - 2.0) / nu);
}

}  // namespace

Eigen::VectorXd simulate_egarch(const estimators::EgarchParams& params, Eigen::Index length,
                                std::uint64_t seed, Eigen::Index burn_in) {
  params.validate();
  std::mt19937_64 rng(seed);
  Eigen::VectorXd out(length);
  // Start from the unconditional log-variance level of the recursion.
  const double mean_abs_z = 0.7;
  double log_h = (params.omega + params.alpha2 * mean_abs_z) / (1.0 - params.beta1);
  for (Eigen::Index t = -burn_in; t < length; ++t) {
    const double z = standardized_t(rng, params.nu);
    if (t >= 0) out[t] = params.mu + std::exp(0.5 * log_h) * z;
    log_h = params.omega + params.alpha1 * z + params.alpha2 * std::abs(z) + params.beta1 * log_h;
  }
  return out;
}

Eigen::MatrixXd simulate_dcc_residuals(double a, double b, const Eigen::MatrixXd& target,
                                       Eigen::Index length, std::uint64_t seed,
                                       Eigen::Index burn_in) {
  const Eigen::Index n = target.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(length, n);
  Eigen::MatrixXd q = target;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = -burn_in; t < length; ++t) {
    if (t > -burn_in) q = (1.0 - a - b) * target + a * prev * prev.transpose() + b * q;
    const Eigen::MatrixXd r = estimators::correlation_from_q(q);
    const Eigen::LLT<Eigen::MatrixXd> llt(r);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    prev = llt.matrixL() * z;
    if (t >= 0) out.row(t) = prev.transpose();
  }
  return out;
}

market_data::PricePanel simulate_garch_prices(const GarchPanelSpec& spec, std::uint64_t seed) {
  const Eigen::Index n = spec.assets;
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, spec.correlation);
  corr.diagonal().setOnes();
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(corr).matrixL();

  Eigen::VectorXd target_var(n), h(n), omega(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vol = spec.daily_vol * (1.0 + 0.25 * static_cast<double>(i));
    target_var[i] = vol * vol;
    omega[i] = target_var[i] * (1.0 - spec.alpha - spec.beta);
    h[i] = target_var[i];
  }
  Eigen::MatrixXd prices(spec.days, n);
  Eigen::VectorXd log_p = Eigen::VectorXd::Constant(n, std::log(100.0));
  Eigen::VectorXd z(n);
  std::vector<Date> dates;
  std::chrono::sys_days day{spec.start};
  for (Eigen::Index t = 0; t < spec.days; ++t) {
    if (t > 0) {
      for (Eigen::Index i = 0; i < n; ++i) z[i] = standardized_t(rng, spec.nu);
      const Eigen::VectorXd shock = chol * z;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double eps = std::sqrt(h[i]) * shock[i];
        log_p[i] += spec.drift + eps;
        h[i] = omega[i] + spec.alpha * eps * eps + spec.beta * h[i];
      }
    }
    prices.row(t) = log_p.array().exp().matrix().transpose();
    dates.emplace_back(day);
    day += std::chrono::days{1};
  }
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back("A" + std::to_string(i));
  return market_data::PricePanel(std::move(dates), std::move(prices), std::move(ids));
}

void write_prices(const market_data::PricePanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "date";
  for (const auto& id : panel.asset_ids()) out << ',' << id;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    out << format_date(panel.dates()[static_cast<std::size_t>(t)]);
    for (Eigen::Index i = 0; i < panel.assets(); ++i) out << ',' << csv::format_exact(panel.prices()(t, i));
    out << '\n';
  }
}

}  // namespace cryptofolio::simulation
