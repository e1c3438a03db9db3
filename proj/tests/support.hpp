#pragma once

#include <Eigen/Dense>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

namespace test_support {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("CRYPTOFOLIO_TEST_TMP");
  const std::filesystem::path base = root ? root : std::filesystem::temp_directory_path() / "cryptofolio_tests";
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random covariance with variances drawn from [lo, hi] and a random
// correlation matrix (normalized Wishart draw).
inline Eigen::MatrixXd random_covariance(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd g(n, n + 2);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = z(rng);
  Eigen::MatrixXd w = g * g.transpose();
  const Eigen::VectorXd d = w.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = d.asDiagonal() * w * d.asDiagonal();
  corr.diagonal().setOnes();
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) sd[i] = std::sqrt(u(rng));
  Eigen::MatrixXd cov = sd.asDiagonal() * corr * sd.asDiagonal();
  return 0.5 * (cov + cov.transpose());
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace test_support
