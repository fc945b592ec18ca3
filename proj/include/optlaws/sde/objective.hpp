#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace optlaws::sde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Known analytic constants of an objective.
struct ObjectiveConstants {
  double L = 0.0;                // gradient Lipschitz constant (on the stated region)
  std::optional<double> ell;     // value Lipschitz constant, when the gradient is bounded
  std::optional<double> f_min;   // global minimum value
};

/// Smooth test function f: R^N → R.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string_view name() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::Ref<const Vec>& x) const = 0;
  virtual void gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const = 0;
  virtual Mat hessian(const Eigen::Ref<const Vec>& x) const = 0;
  virtual ObjectiveConstants constants() const = 0;
  /// A stationary point used as the default x*.
  virtual Vec minimizer() const = 0;

  Vec gradient(const Eigen::Ref<const Vec>& x) const;
};

/// f(x) = ½ (x − c)ᵀ H (x − c) with H symmetric positive semidefinite.
class Quadratic final : public Objective {
 public:
  explicit Quadratic(Mat H, std::optional<Vec> center = std::nullopt);

  std::string_view name() const override { return "quadratic"; }
  Eigen::Index dim() const override { return H_.rows(); }
  double value(const Eigen::Ref<const Vec>& x) const override;
  void gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const override;
  Mat hessian(const Eigen::Ref<const Vec>& x) const override;
  ObjectiveConstants constants() const override;
  Vec minimizer() const override { return center_; }

  const Mat& H() const { return H_; }

 private:
  Mat H_;
  Vec center_;
  double L_;
};

/// f(x) = Σ (x_i² − 1)². L = 12R² − 4 holds on the box |x_i| ≤ R.
class DoubleWell final : public Objective {
 public:
  explicit DoubleWell(Eigen::Index n, double box_radius = 2.0);

  std::string_view name() const override { return "double_well"; }
  Eigen::Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& x) const override;
  void gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const override;
  Mat hessian(const Eigen::Ref<const Vec>& x) const override;
  ObjectiveConstants constants() const override;
  Vec minimizer() const override { return Vec::Ones(n_); }

 private:
  Eigen::Index n_;
  double radius_;
};

/// Chained Rosenbrock Σ 100 (x_{i+1} − x_i²)² + (1 − x_i)². L is a
/// Gershgorin bound over the box |x_i| ≤ R.
class Rosenbrock final : public Objective {
 public:
  explicit Rosenbrock(Eigen::Index n, double box_radius = 2.0);

  std::string_view name() const override { return "rosenbrock"; }
  Eigen::Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& x) const override;
  void gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const override;
  Mat hessian(const Eigen::Ref<const Vec>& x) const override;
  ObjectiveConstants constants() const override;
  Vec minimizer() const override { return Vec::Ones(n_); }

 private:
  Eigen::Index n_;
  double radius_;
};

/// f(x) = Σ log cosh(x_i). Gradient bounded by √N, Hessian by 1.
class LogCosh final : public Objective {
 public:
  explicit LogCosh(Eigen::Index n);

  std::string_view name() const override { return "log_cosh"; }
  Eigen::Index dim() const override { return n_; }
  double value(const Eigen::Ref<const Vec>& x) const override;
  void gradient(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const override;
  Mat hessian(const Eigen::Ref<const Vec>& x) const override;
  ObjectiveConstants constants() const override;
  Vec minimizer() const override { return Vec::Zero(n_); }

 private:
  Eigen::Index n_;
};

/// Catalog lookup: "quadratic" (identity Hessian scaled by `scale`),
/// "double_well", "rosenbrock", "log_cosh".
std::unique_ptr<Objective> make_objective(std::string_view name, Eigen::Index n,
                                          double scale = 1.0);

}  // namespace optlaws::sde
