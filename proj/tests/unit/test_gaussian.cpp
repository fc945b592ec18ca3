#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "optlaws/error.hpp"
#include "optlaws/sde/gaussian.hpp"

using namespace optlaws;
using namespace optlaws::sde;

namespace {

Mat spd(int n, double shift) {
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = std::sin(1.0 + i * 3.1 + j * 1.7);
  return A * A.transpose() / n + shift * Mat::Identity(n, n);
}

const std::vector<double> kTimes{0.5, 1.0, 2.5, 4.0};

}  // namespace

TEST(Gaussian, NoNoiseFromZeroStaysZero) {
  const LinearSde sde{spd(3, 0.5), Mat::Zero(3, 3), Mat::Zero(3, 3)};
  for (const Mat& P : covariance_closed_form(Schedule::warmup_cooldown(1.0, 1.0, 4.0), sde, kTimes))
    EXPECT_EQ(P.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gaussian, FrozenScheduleKeepsInitial) {
  const Mat P0 = spd(3, 0.2);
  const LinearSde sde{spd(3, 0.5), spd(3, 0.1), P0};
  for (const Mat& P : covariance_closed_form(Schedule::constant(0.0, 4.0), sde, kTimes))
    EXPECT_LE((P - P0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gaussian, ScalarOrnsteinUhlenbeck) {
  const double g = 1.3, q = 0.7, p0 = 0.4, eta = 0.8;
  const LinearSde sde{Mat::Constant(1, 1, g), Mat::Constant(1, 1, q), Mat::Constant(1, 1, p0)};
  const auto P = covariance_closed_form(Schedule::constant(eta, 4.0), sde, kTimes);
  for (std::size_t i = 0; i < kTimes.size(); ++i) {
    const double decay = std::exp(-2.0 * g * eta * kTimes[i]);
    const double expected = p0 * decay + eta * q / (2.0 * g) * (1.0 - decay);
    EXPECT_NEAR(P[i](0, 0), expected, 1e-10);
  }
}

TEST(Gaussian, ClosedFormAgreesWithRk4) {
  const Schedule s = Schedule::general(1.0, 0.6, {0.5, 1.5, 2.5}, 4.0, CooldownShape::cosine);
  Mat G = spd(4, 0.3);
  G(0, 3) += 0.4;  // non-symmetric path
  for (const Mat& gen : {spd(4, 0.3), G}) {
    const LinearSde sde{gen, spd(4, 0.05), spd(4, 0.1)};
    const auto closed = covariance_closed_form(s, sde, kTimes);
    const Rk4Report ode = covariance_rk4(s, sde, kTimes, 1e-10);
    for (std::size_t i = 0; i < kTimes.size(); ++i)
      EXPECT_LE((closed[i] - ode.values[i]).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Gaussian, CovarianceStaysPsd) {
  const LinearSde sde{spd(5, 0.1), spd(5, 0.0), Mat::Zero(5, 5)};
  for (const Mat& P : covariance_closed_form(Schedule::warmup_cooldown(2.0, 1.0, 4.0), sde, kTimes)) {
    EXPECT_LE((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat> es(P);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
  }
}

TEST(Gaussian, RequiresStationaryCentre) {
  const Quadratic f(Mat::Identity(2, 2));
  const NoiseModel noise = NoiseModel::isotropic(2, 0.1);
  SdeConfig c;
  c.schedule = Schedule::constant(1.0, 4.0);
  c.x0 = Vec::Ones(2);
  c.x_star = Vec::Ones(2);
  EXPECT_THROW(gaussian_process(f, noise, c, kTimes), DomainError);
}

TEST(Gaussian, AdamStateHasThreeBlocks) {
  const Quadratic f(spd(2, 0.5));
  const NoiseModel noise = NoiseModel::isotropic(2, 0.2);
  SdeConfig c;
  c.schedule = Schedule::warmup_cooldown(1.0, 0.5, 4.0);
  c.algorithm = Algorithm::adam;
  c.x0 = Vec::Constant(2, 0.3);
  const GaussianProcess gp = gaussian_process(f, noise, c, kTimes);
  EXPECT_EQ(gp.generator.rows(), 6);
  EXPECT_LE(gp.discrepancy, 1e-6);
  EXPECT_GT(position_trace(gp.closed_form.back(), 2), 0.0);
}
