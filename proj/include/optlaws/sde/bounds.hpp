#pragma once

#include <optional>

#include "optlaws/schedule.hpp"
#include "optlaws/sde/noise.hpp"
#include "optlaws/sde/objective.hpp"
#include "optlaws/sde/simulate.hpp"

namespace optlaws::sde {

/// Constants the convergence bounds need. Unset fields fall back to what the
/// objective and noise model know; a bound that still lacks a constant throws.
struct BoundConstants {
  std::optional<double> L;
  std::optional<double> f_min;
  std::optional<double> ell;
  std::optional<double> sigma0;     // SGD noise scale; default NoiseModel::sigma0()
  std::optional<double> sigma_bar;  // Adam: sup λ_max Σ(x); default λ_max(Σ_g) for exact noise
  std::optional<double> V;          // Adam: sup ‖v_t‖_∞; default max(‖v0‖_∞, max diag Σ_g)
  std::optional<double> M;          // Adam: sup E‖m_t‖² ≤ M² N; needed for the gradient bound
};

struct ConvergenceBound {
  /// SGD: bound on the η-weighted average ‖∇f‖². Adam: bound on the same
  /// quantity, present only when ℓ and M are known.
  std::optional<double> gradient;
  /// Adam only: bound on the η-weighted average ‖m‖².
  std::optional<double> momentum;
};

/// Right-hand sides of the SGD and Adam convergence bounds over [0, t].
///   SGD:  (f(X0) − f_min)/∫η + η0 L σ0² N ∫η² / (2∫η)
///   Adam: see the header comment of each term in the implementation.
ConvergenceBound convergence_bound(const Objective& objective, const NoiseModel& noise,
                                   const SdeConfig& config, double t,
                                   const BoundConstants& constants = {});

struct EscapeBounds {
  double escape_lower = 1.0;   // 1 − √(eε/Tr P), clipped to [0, 1]
  double trapped_upper = 0.0;  // √(eε/Tr P), clipped to [0, 1]
  double chernoff = 0.0;       // √(ε/Tr P)·exp((Tr P − ε)/(2 Tr P)), clipped to [0, 1]
  bool vacuous = false;        // ε ≥ Tr P / e
};

/// Gaussian anti-concentration bounds for P[‖X − μ‖² ≤ ε] with Tr Cov X = trace.
EscapeBounds escape_bounds(double trace, double eps);

/// √(ε ∫₀ᵀ η'² / (η_max⁴ Tr Σ_g)); the functional form of the trapping
/// probability for schedules that start at η_max and end at 0.
double escape_order(const Schedule& schedule, double T, double trace_sigma_g, double eps);

}  // namespace optlaws::sde
