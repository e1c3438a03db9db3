#include "cryptofolio/market_data.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace cryptofolio::market_data {

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

TestResult jarque_bera(const Eigen::VectorXd& series) {
  const double n = static_cast<double>(series.size());
  if (series.size() < 8) throw std::invalid_argument("jarque_bera: need at least 8 observations");
  const Eigen::ArrayXd centered = series.array() - series.mean();
  const double m2 = centered.square().mean();
  if (!(m2 > 0.0)) throw std::invalid_argument("jarque_bera: zero variance");
  const double skew = centered.cube().mean() / std::pow(m2, 1.5);
  const double kurt = centered.square().square().mean() / (m2 * m2);
  TestResult out;
  out.statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  out.p_value = chi_square_sf(out.statistic, 2.0);
  return out;
}

TestResult arch_lm(const Eigen::VectorXd& series, int lags) {
  if (lags < 1) throw std::invalid_argument("arch_lm: lags must be positive");
  const Eigen::Index total = series.size();
  if (total <= lags + 1) throw std::invalid_argument("arch_lm: series too short for lag count");
  const Eigen::VectorXd sq = (series.array() - series.mean()).square().matrix();
  const Eigen::Index n = total - lags;
  Eigen::MatrixXd x(n, lags + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    y[t] = sq[t + lags];
    x(t, 0) = 1.0;
    for (int k = 1; k <= lags; ++k) x(t, k) = sq[t + lags - k];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < lags + 1) throw std::invalid_argument("arch_lm: singular regressor matrix");
  const Eigen::VectorXd coef = qr.solve(y);
  const Eigen::VectorXd resid = y - x * coef;
  const double tss = (y.array() - y.mean()).square().sum();
  if (!(tss > 0.0)) throw std::invalid_argument("arch_lm: squared residuals are constant");
  const double r2 = 1.0 - resid.squaredNorm() / tss;
  TestResult out;
  out.statistic = static_cast<double>(n) * r2;
  out.p_value = chi_square_sf(out.statistic, static_cast<double>(lags));
  return out;
}

}  // namespace cryptofolio::market_data
