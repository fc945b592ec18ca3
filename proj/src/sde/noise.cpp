#include "optlaws/sde/noise.hpp"

#include <cmath>

#include "optlaws/error.hpp"

namespace optlaws::sde {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseModel::NoiseModel(Mat sigma_g, std::size_t samples, double prop3_constant)
    : sigma_g_(std::move(sigma_g)), samples_(samples), C_(prop3_constant) {
  if (sigma_g_.rows() == 0 || sigma_g_.rows() != sigma_g_.cols())
    throw InvalidArgument("noise covariance must be a nonempty square matrix");
  if (!sigma_g_.isApprox(sigma_g_.transpose(), 1e-12) && !sigma_g_.isZero())
    throw InvalidArgument("noise covariance must be symmetric");
  if (!(prop3_constant >= 0.0)) throw InvalidArgument("constant C must be nonnegative");
  sigma_g_ = 0.5 * (sigma_g_ + sigma_g_.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> es(sigma_g_);
  const Vec ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -tol) throw InvalidArgument("noise covariance must be positive semidefinite");
  const Vec root_ev = ev.cwiseMax(0.0).cwiseSqrt();
  root_ = es.eigenvectors() * root_ev.asDiagonal() * es.eigenvectors().transpose();
  sigma_g_scale_ = root_ev.maxCoeff();
  diagonal_ = sigma_g_.isDiagonal(0.0);
  if (diagonal_) root_ = sigma_g_.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

NoiseModel NoiseModel::isotropic(Eigen::Index n, double variance, std::size_t samples) {
  if (!(variance >= 0.0)) throw InvalidArgument("noise variance must be nonnegative");
  return NoiseModel(variance * Mat::Identity(n, n), samples);
}

double NoiseModel::sigma0() const {
  const double N = static_cast<double>(dim());
  const double D = samples_ > 0 ? static_cast<double>(samples_) : N;
  return sigma_g_scale_ * std::sqrt(1.0 + std::sqrt(D / N) + C_ / std::pow(N, 2.0 / 3.0));
}

void NoiseModel::sample(PathRng& rng, Eigen::Ref<Vec> out, Eigen::Ref<Vec> scratch,
                        Vec* diag) const {
  const Eigen::Index n = dim();
  if (sigma_g_scale_ == 0.0) {
    out.setZero();
    if (diag) diag->setZero(n);
    return;
  }
  if (samples_ == 0) {
    if (diag) *diag = sigma_g_.diagonal();
    auto xi = scratch.head(n);
    rng.fill_normal(xi);
    if (diagonal_)
      out = root_.diagonal().cwiseProduct(xi);
    else
      out.noalias() = root_ * xi;
    return;
  }
  // Σ(x) = Z Zᵀ / D, so Z w / √D with w ~ N(0, I_D) has covariance Σ(x).
  auto xi = scratch.head(n);
  out.setZero();
  if (diag) diag->setZero(n);
  Vec col(n);
  for (std::size_t d = 0; d < samples_; ++d) {
    rng.fill_normal(xi);
    if (diagonal_)
      col = root_.diagonal().cwiseProduct(xi);
    else
      col.noalias() = root_ * xi;
    out += rng.normal() * col;
    if (diag) *diag += col.cwiseAbs2();
  }
  const double D = static_cast<double>(samples_);
  out /= std::sqrt(D);
  if (diag) *diag /= D;
}

}  // namespace optlaws::sde
