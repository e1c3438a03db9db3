#pragma once

#include "cryptofolio/estimators.hpp"
#include "cryptofolio/market_data.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace cryptofolio::simulation {

/// Draws a return path r_t = mu + sqrt(h_t) z_t with unit-variance Student-t
/// innovations and the EGARCH log-variance recursion. The first `burn_in`
/// draws are discarded.
Eigen::VectorXd simulate_egarch(const estimators::EgarchParams& params, Eigen::Index length,
                                std::uint64_t seed, Eigen::Index burn_in = 1000);

/// Gaussian standardized residuals whose correlation follows the DCC(1,1)
/// recursion around `target` (a correlation matrix).
Eigen::MatrixXd simulate_dcc_residuals(double a, double b, const Eigen::MatrixXd& target,
                                       Eigen::Index length, std::uint64_t seed,
                                       Eigen::Index burn_in = 500);

struct GarchPanelSpec {
  Eigen::Index assets = 4;
  Eigen::Index days = 2899;  // price rows
  double correlation = 0.7;  // constant pairwise correlation of shocks
  double daily_vol = 0.04;
  double alpha = 0.10;
  double beta = 0.85;
  double drift = 0.0005;
  double nu = 5.0;  // Student-t shocks, rescaled to unit variance
  Date start{std::chrono::year{2015}, std::chrono::month{8}, std::chrono::day{7}};
};

/// Daily closes for a correlated GARCH(1,1) panel with heterogeneous asset
/// volatilities (asset i scaled by 1 + 0.25 i). Labels are A0, A1, ...
market_data::PricePanel simulate_garch_prices(const GarchPanelSpec& spec, std::uint64_t seed);

void write_prices(const market_data::PricePanel& panel, const std::filesystem::path& path);

}  // namespace cryptofolio::simulation
