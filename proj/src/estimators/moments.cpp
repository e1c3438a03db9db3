#include "cryptofolio/estimators.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

namespace cryptofolio::estimators {

MomentEstimate::MomentEstimate(Eigen::Index target_index, Eigen::VectorXd mean,
                               Eigen::MatrixXd cov)
    : target_index_(target_index), mean_(std::move(mean)), cov_(std::move(cov)) {
  const Eigen::Index n = mean_.size();
  if (cov_.rows() != n || cov_.cols() != n) {
    throw std::invalid_argument("moment estimate: mean/covariance dimension mismatch");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw std::invalid_argument("moment estimate: non-finite entries for target " +
                                std::to_string(target_index_));
  }
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    throw std::invalid_argument("moment estimate: covariance not symmetric (" +
                                std::to_string(asym) + ")");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose());
  if (n == 0) return;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -kPsdTolerance) {
    throw std::invalid_argument("moment estimate: covariance not PSD (min eigenvalue " +
                                std::to_string(min_eig) + ")");
  }
  if (min_eig < 0.0) {
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    cov_ = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    cov_ = 0.5 * (cov_ + cov_.transpose());
    repaired_ = true;
  }
}

SampleMoments sample_moments(const Eigen::Ref<const Eigen::MatrixXd>& window) {
  const Eigen::Index m = window.rows();
  if (m < 2) throw std::invalid_argument("sample_moments: window needs at least 2 rows");
  SampleMoments out;
  out.mean = window.colwise().mean().transpose();
  const Eigen::MatrixXd centered = window.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(m);
  return out;
}

RollingMoments::RollingMoments(Eigen::Index assets)
    : sum_(Eigen::VectorXd::Zero(assets)), outer_(Eigen::MatrixXd::Zero(assets, assets)) {}

void RollingMoments::add(const Eigen::Ref<const Eigen::VectorXd>& row) {
  sum_ += row;
  outer_.noalias() += row * row.transpose();
  ++count_;
}

void RollingMoments::drop(const Eigen::Ref<const Eigen::VectorXd>& row) {
  if (count_ == 0) throw std::logic_error("RollingMoments: drop from empty window");
  sum_ -= row;
  outer_.noalias() -= row * row.transpose();
  --count_;
}

SampleMoments RollingMoments::moments() const {
  if (count_ < 2) throw std::invalid_argument("RollingMoments: window needs at least 2 rows");
  const double m = static_cast<double>(count_);
  SampleMoments out;
  out.mean = sum_ / m;
  out.cov = outer_ / m - out.mean * out.mean.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

Eigen::VectorXd baseline_forecast(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                  BaselineKind kind, Eigen::Index assets) {
  if (kind == BaselineKind::zero) return Eigen::VectorXd::Zero(assets);
  if (window.rows() == 0) throw std::invalid_argument("baseline_forecast: empty window");
  return window.colwise().mean().transpose();
}

}  // namespace cryptofolio::estimators
