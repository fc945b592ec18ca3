#pragma once

#include <cstdint>
#include <random>

#include "optlaws/sde/objective.hpp"

namespace optlaws::sde {

/// splitmix64 finalizer; used to derive independent per-path seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Per-path generator seeded from (seed, path), so results do not depend on
/// the order in which paths run.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path) : engine_(mix_seed(seed, path)) {}

  double normal() { return dist_(engine_); }
  void fill_normal(Eigen::Ref<Vec> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = dist_(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Gradient noise with covariance Σ_g. With `samples` = D > 0 the step noise
/// follows the empirical covariance of D fresh draws, z = Z w / √D with
/// Z ∈ R^{N×D} of N(0, Σ_g) columns and w ~ N(0, I_D); with D = 0 it is
/// exactly N(0, Σ_g).
class NoiseModel {
 public:
  explicit NoiseModel(Mat sigma_g, std::size_t samples = 0, double prop3_constant = 1.0);

  static NoiseModel isotropic(Eigen::Index n, double variance, std::size_t samples = 0);

  const Mat& sigma_g() const { return sigma_g_; }
  Eigen::Index dim() const { return sigma_g_.rows(); }
  std::size_t samples() const { return samples_; }
  double prop3_constant() const { return C_; }

  /// λ_max(Σ_g^{1/2}).
  double sigma_g_scale() const { return sigma_g_scale_; }
  double trace() const { return sigma_g_.trace(); }
  /// Symmetric square root Σ_g^{1/2}.
  const Mat& root() const { return root_; }
  bool is_zero() const { return sigma_g_scale_ == 0.0; }

  /// σ₀ = σ_g √((1 + √(D/N)) + C/N^{2/3}); D defaults to N when unset.
  double sigma0() const;

  /// Draws one step of noise into `out`; `scratch` must hold N entries.
  /// When `diag` is given it receives diag Σ(x) of the covariance used.
  void sample(PathRng& rng, Eigen::Ref<Vec> out, Eigen::Ref<Vec> scratch,
              Vec* diag = nullptr) const;

 private:
  Mat sigma_g_;
  Mat root_;
  std::size_t samples_;
  double C_;
  double sigma_g_scale_;
  bool diagonal_;
};

}  // namespace optlaws::sde
