#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "optlaws/schedule.hpp"
#include "optlaws/sde/noise.hpp"
#include "optlaws/sde/objective.hpp"

namespace optlaws::sde {

enum class Algorithm { sgd, adam };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

/// Constants of the Adam dynamics. With the default c1_hat = 0.1,
/// c1_prime = √(c1·c1_hat).
struct AdamConstants {
  double c1 = 1.0;
  double c1_prime = 0.31622776601683794;
  double c2 = 1.0;
  double eps = 1e-8;

  static AdamConstants from_discrete(double c1, double c1_hat, double c2, double eps);
  void validate() const;
};

struct SdeConfig {
  Schedule schedule = Schedule::constant(1.0, 1.0);
  /// Euler–Maruyama step Δt; the raw step size is eta0·η(t).
  double eta0 = 1e-2;
  /// Simulated horizon; defaults to the schedule horizon.
  std::optional<double> horizon;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::sgd;
  AdamConstants adam;
  Vec x0;
  std::optional<Vec> m0;
  std::optional<Vec> v0;
  /// Centre for the trapping statistics; defaults to the objective minimizer.
  std::optional<Vec> x_star;
  /// Radii ε of the balls ‖X_T − x*‖² ≤ ε.
  std::vector<double> trap_eps;
  /// Times at which the ensemble mean of m is recorded (Adam only).
  std::size_t momentum_checkpoints = 0;
  /// Per-path traces for the first `trace_paths` paths every `trace_stride` steps.
  std::size_t trace_paths = 0;
  std::size_t trace_stride = 1;
  unsigned threads = 1;

  double end_time() const { return horizon.value_or(schedule.horizon()); }
  /// Throws InvalidArgument on inconsistent settings.
  void validate(Eigen::Index dim) const;
};

/// Mean and standard error over paths.
struct Statistic {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

struct TracePoint {
  std::size_t path = 0;
  double t = 0.0;
  double x_norm = 0.0;
  double grad_norm = 0.0;
};

struct MomentumCheckpoint {
  double t = 0.0;
  double mean_norm = 0.0;  // ‖E[m_t]‖
  double std_err = 0.0;
};

struct TrapFrequency {
  double eps = 0.0;
  Statistic frequency;
};

struct SimulationResult {
  std::size_t steps = 0;
  /// η-weighted time averages per path, then averaged over paths.
  Statistic weighted_grad_sq;
  Statistic weighted_momentum_sq;
  Statistic final_sq_distance;
  Vec final_mean;
  std::vector<TrapFrequency> trapped;
  std::vector<MomentumCheckpoint> momentum;
  double min_v = 0.0;
  std::vector<TracePoint> traces;
};

/// Euler–Maruyama with Δt = eta0, which coincides with the discrete
/// optimizer. SGD: x ← x − η0 η_k (∇f(x) + z). Adam:
///   x ← x − η_k Δt m/√(v+ε)
///   m ← m − c1 η_k Δt (m − ∇f(x)) + c1' η_k √Δt σ ξ
///   v ← v − c2 η_k Δt (v − diag Σ(x)).
/// Throws DivergedPath on the first non-finite state.
SimulationResult simulate(const Objective& objective, const NoiseModel& noise,
                          const SdeConfig& config);

}  // namespace optlaws::sde
