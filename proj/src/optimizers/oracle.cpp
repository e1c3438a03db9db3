#include "cryptofolio/optimizers.hpp"

#include <cmath>
#include <limits>

namespace cryptofolio::optimizers {

GridResult grid_oracle(const std::function<double(const Eigen::VectorXd&)>& objective,
                       Eigen::Index assets, double step, Exec exec) {
  if (assets != 2 && assets != 3) throw std::invalid_argument("grid_oracle: only 2 or 3 assets");
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("grid_oracle: step must lie in (0, 1]");
  const long k = std::lround(1.0 / step);
  if (k < 1 || std::abs(static_cast<double>(k) * step - 1.0) > 1e-9) {
    throw std::invalid_argument("grid_oracle: step must divide 1");
  }
  const double kd = static_cast<double>(k);

  // One row of the lattice per leading coordinate i; the rows are scanned
  // independently and reduced in order.
  const auto rows = static_cast<std::size_t>(k + 1);
  std::vector<GridResult> best(rows);
  parallel_for(rows, exec, [&](std::size_t row) {
    const long i = static_cast<long>(row);
    GridResult r;
    r.value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd w(assets);
    if (assets == 2) {
      w << i / kd, (k - i) / kd;
      r.point = w;
      r.value = objective(w);
      r.evaluated = 1;
    } else {
      for (long j = 0; j <= k - i; ++j) {
        w << i / kd, j / kd, (k - i - j) / kd;
        const double v = objective(w);
        ++r.evaluated;
        if (v < r.value || r.point.size() == 0) {
          r.value = v;
          r.point = w;
        }
      }
    }
    best[row] = std::move(r);
  });

  GridResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (auto& r : best) {
    out.evaluated += r.evaluated;
    if (r.value < out.value || out.point.size() == 0) {
      out.value = r.value;
      out.point = r.point;
    }
  }
  return out;
}

double objective_lipschitz_bound(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 double gamma, double beta) {
  const double row_sum = sigma.cwiseAbs().rowwise().sum().maxCoeff();
  const double mu_max = mu.size() > 0 ? mu.cwiseAbs().maxCoeff() : 0.0;
  return static_cast<double>(sigma.rows()) * (gamma * row_sum + mu_max + beta);
}

}  // namespace cryptofolio::optimizers
