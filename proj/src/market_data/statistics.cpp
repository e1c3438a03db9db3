#include "cryptofolio/market_data.hpp"

#include <algorithm>
#include <cmath>

namespace cryptofolio::market_data {

namespace {

// Single-pass central moments (Terriberry's update of Welford's method).
struct RunningMoments {
  double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

  void push(double x) {
    const double n1 = n;
    n += 1.0;
    const double delta = x - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
  }
};

}  // namespace

std::vector<DescriptiveStats> descriptive_stats(const ReturnPanel& panel) {
  if (panel.rows() < 4) throw std::invalid_argument("descriptive_stats: need at least 4 rows");
  std::vector<DescriptiveStats> out;
  const Eigen::MatrixXd& r = panel.returns();
  for (Eigen::Index i = 0; i < panel.assets(); ++i) {
    RunningMoments acc;
    DescriptiveStats s;
    s.min = r.col(i).minCoeff();
    s.max = r.col(i).maxCoeff();
    for (Eigen::Index t = 0; t < r.rows(); ++t) acc.push(r(t, i));
    // Log returns telescope, so exp(sum) is exactly p_last / p_first.
    s.growth_pct = 100.0 * std::expm1(r.col(i).sum());
    s.mean = acc.mean;
    s.std_dev = std::sqrt(acc.m2 / (acc.n - 1.0));
    const double var_pop = acc.m2 / acc.n;
    if (var_pop > 0.0 && s.std_dev > 1e-300 &&
        (s.max - s.min) > 1e-15 * std::max(1.0, std::abs(s.mean))) {
      s.skewness = (acc.m3 / acc.n) / std::pow(var_pop, 1.5);
      s.kurtosis = (acc.m4 / acc.n) / (var_pop * var_pop);
    } else {
      s.std_dev = 0.0;
    }
    out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd unconditional_correlation(const ReturnPanel& panel, Eigen::Index first,
                                          Eigen::Index count) {
  if (count < 2) throw std::invalid_argument("unconditional_correlation: slice shorter than 2");
  if (first < 0 || first + count > panel.rows()) {
    throw std::out_of_range("unconditional_correlation: slice outside panel");
  }
  const Eigen::MatrixXd block = panel.returns().middleRows(first, count);
  const Eigen::RowVectorXd mean = block.colwise().mean();
  const Eigen::MatrixXd centered = block.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::Index n = panel.assets();
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(cov(i, i) > 0.0)) {
      throw std::invalid_argument("unconditional_correlation: zero variance for '" +
                                  panel.asset_ids()[static_cast<std::size_t>(i)] + "'");
    }
    sd[i] = std::sqrt(cov(i, i));
  }
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double rho = std::clamp(cov(i, j) / (sd[i] * sd[j]), -1.0, 1.0);
      corr(i, j) = corr(j, i) = rho;
    }
  }
  return corr;
}

}  // namespace cryptofolio::market_data
