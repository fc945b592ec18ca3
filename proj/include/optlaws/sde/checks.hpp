#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "optlaws/sde/objective.hpp"

namespace optlaws::sde {

struct AntiConcentrationRow {
  double eps = 0.0;
  double frequency = 0.0;  // empirical P[‖x − μ‖² ≤ ε]
  double std_err = 0.0;
  double bound = 0.0;      // √(eε/Tr Σ), clipped to 1
  bool vacuous = false;
};

/// Monte-Carlo estimate of P[‖x − μ‖² ≤ ε] for x ~ N(μ, Σ) at each ε.
std::vector<AntiConcentrationRow> anti_concentration_check(const Vec& mu, const Mat& sigma,
                                                           std::span<const double> eps,
                                                           std::size_t samples,
                                                           std::uint64_t seed);

struct TraceDeviationRow {
  double t = 0.0;
  double frequency = 0.0;  // fraction of trials with |Tr Σ̂ − Tr Σ_g| ≥ t
  double bernstein = 0.0;  // 2 exp(−D t² / (4 Tr Σ_g² + 2 t σ_g²))
};

struct RandomMatrixReport {
  std::size_t dim = 0;
  std::size_t samples = 0;
  std::size_t trials = 0;
  std::vector<TraceDeviationRow> trace_deviation;
  double mean_lambda_max = 0.0;
  double lambda_max_std_err = 0.0;
  double sigma_g_sq = 0.0;       // λ_max(Σ_g)
  double prop3_bound = 0.0;      // (1 + √(D/N)) σ_g²
  double edge_bound = 0.0;       // (1 + √(N/D))² σ_g²
  double prop3_residual = 0.0;   // mean λ_max − prop3_bound
};

/// Draws D i.i.d. N(0, Σ_g) vectors per trial and forms Σ̂ = (1/D) Σ z zᵀ.
RandomMatrixReport random_matrix_checks(const Mat& sigma_g, std::size_t samples,
                                        std::size_t trials, std::span<const double> t_grid,
                                        std::uint64_t seed);

}  // namespace optlaws::sde
