#include "optlaws/sde/objective.hpp"

#include <cmath>

#include "optlaws/error.hpp"

namespace optlaws::sde {

Vec Objective::gradient(const Eigen::Ref<const Vec>& x) const {
  Vec g(dim());
  gradient(x, g);
  return g;
}

Quadratic::Quadratic(Mat H, std::optional<Vec> center) : H_(std::move(H)) {
  if (H_.rows() == 0 || H_.rows() != H_.cols())
    throw InvalidArgument("quadratic Hessian must be a nonempty square matrix");
  if (!H_.isApprox(H_.transpose(), 1e-12)) throw InvalidArgument("quadratic Hessian must be symmetric");
  H_ = 0.5 * (H_ + H_.transpose());
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(H_, Eigen::EigenvaluesOnly).eigenvalues();
  if (ev.minCoeff() < -1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw InvalidArgument("quadratic Hessian must be positive semidefinite");
  L_ = ev.maxCoeff();
  center_ = center.value_or(Vec::Zero(H_.rows()));
  if (center_.size() != H_.rows()) throw InvalidArgument("quadratic center has the wrong size");
}

double Quadratic::value(const Eigen::Ref<const Vec>& x) const {
  const Vec d = x - center_;
  return 0.5 * d.dot(H_ * d);
}

void Quadratic::gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const {
  out.noalias() = H_ * (x - center_);
}

Mat Quadratic::hessian(const Eigen::Ref<const Vec>&) const { return H_; }

ObjectiveConstants Quadratic::constants() const { return {L_, std::nullopt, 0.0}; }

DoubleWell::DoubleWell(Eigen::Index n, double box_radius) : n_(n), radius_(box_radius) {
  if (n <= 0) throw InvalidArgument("dimension must be positive");
  if (!(box_radius >= 1.0)) throw InvalidArgument("double-well box radius must be at least 1");
}

double DoubleWell::value(const Eigen::Ref<const Vec>& x) const {
  return (x.array().square() - 1.0).square().sum();
}

void DoubleWell::gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const {
  out = 4.0 * x.array() * (x.array().square() - 1.0);
}

Mat DoubleWell::hessian(const Eigen::Ref<const Vec>& x) const {
  return (12.0 * x.array().square() - 4.0).matrix().asDiagonal();
}

ObjectiveConstants DoubleWell::constants() const {
  return {12.0 * radius_ * radius_ - 4.0, std::nullopt, 0.0};
}

Rosenbrock::Rosenbrock(Eigen::Index n, double box_radius) : n_(n), radius_(box_radius) {
  if (n < 2) throw InvalidArgument("Rosenbrock needs at least two dimensions");
  if (!(box_radius > 0.0)) throw InvalidArgument("box radius must be positive");
}

double Rosenbrock::value(const Eigen::Ref<const Vec>& x) const {
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < n_; ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

void Rosenbrock::gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const {
  out.setZero();
  for (Eigen::Index i = 0; i + 1 < n_; ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    out[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
    out[i + 1] += 200.0 * a;
  }
}

Mat Rosenbrock::hessian(const Eigen::Ref<const Vec>& x) const {
  Mat h = Mat::Zero(n_, n_);
  for (Eigen::Index i = 0; i + 1 < n_; ++i) {
    h(i, i) += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
    h(i, i + 1) += -400.0 * x[i];
    h(i + 1, i) += -400.0 * x[i];
    h(i + 1, i + 1) += 200.0;
  }
  return h;
}

ObjectiveConstants Rosenbrock::constants() const {
  const double R = radius_;
  return {1200.0 * R * R + 1200.0 * R + 202.0, std::nullopt, 0.0};
}

LogCosh::LogCosh(Eigen::Index n) : n_(n) {
  if (n <= 0) throw InvalidArgument("dimension must be positive");
}

double LogCosh::value(const Eigen::Ref<const Vec>& x) const {
  double f = 0.0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    // log cosh(u) = |u| + log1p(e^{-2|u|}) − log 2, stable for large |u|.
    const double a = std::abs(x[i]);
    f += a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
  }
  return f;
}

void LogCosh::gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const {
  out = x.array().tanh();
}

Mat LogCosh::hessian(const Eigen::Ref<const Vec>& x) const {
  return (1.0 - x.array().tanh().square()).matrix().asDiagonal();
}

ObjectiveConstants LogCosh::constants() const {
  return {1.0, std::sqrt(static_cast<double>(n_)), 0.0};
}

std::unique_ptr<Objective> make_objective(std::string_view name, Eigen::Index n, double scale) {
  if (name == "quadratic") return std::make_unique<Quadratic>(scale * Mat::Identity(n, n));
  if (name == "double_well") return std::make_unique<DoubleWell>(n);
  if (name == "rosenbrock") return std::make_unique<Rosenbrock>(n);
  if (name == "log_cosh") return std::make_unique<LogCosh>(n);
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

}  // namespace optlaws::sde
