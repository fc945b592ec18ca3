#pragma once

#include <span>
#include <vector>

#include "optlaws/schedule.hpp"
#include "optlaws/sde/noise.hpp"
#include "optlaws/sde/objective.hpp"
#include "optlaws/sde/simulate.hpp"

namespace optlaws::sde {

/// dP/dt = −η(t)(G P + P Gᵀ) + η(t)² Q with P(0) = P0.
struct LinearSde {
  Mat G;
  Mat Q;
  Mat P0;
};

/// Exact solution at the given sorted times in [0, S]. Each step between
/// consecutive times applies Φ = exp(−G ∫η) and adds the integrated noise;
/// a symmetric G is diagonalized, otherwise the matrix exponential is used.
std::vector<Mat> covariance_closed_form(const Schedule& schedule, const LinearSde& sde,
                                        std::span<const double> times, double tol = 1e-13);

struct Rk4Report {
  std::vector<Mat> values;
  std::size_t steps = 0;  // steps per unit time scale of the last refinement
  double change = 0.0;    // max difference to the previous refinement
};

/// Classical RK4 that never steps across schedule joints or output times.
/// Starts from S/initial_steps and halves the step until two refinements
/// agree to rel_tol·(1 + ‖P‖).
Rk4Report covariance_rk4(const Schedule& schedule, const LinearSde& sde,
                         std::span<const double> times, double rel_tol = 1e-8,
                         std::size_t initial_steps = 2000);

struct GaussianProcess {
  std::vector<double> times;
  std::vector<Vec> mean;  // position block of the mean
  Mat generator;
  Mat noise;
  std::vector<Mat> closed_form;
  std::vector<Mat> ode;
  double discrepancy = 0.0;  // max over times of max |closed − ode|
};

/// Linearization at x* of the SGD or Adam dynamics described by `config`.
/// SGD: G = H, Q = η0 Σ. Adam, state (x, m, v):
///   G = [[0, Diag(diag Σ + ε)^{-1/2}, 0], [−c1 H, c1 I, 0], [0, 0, c2 I]],
///   Q = c1'² blkdiag(0, Σ, 0), v0 = diag Σ unless given.
/// Requires ‖∇f(x*)‖ ≤ 1e-8.
GaussianProcess gaussian_process(const Objective& objective, const NoiseModel& noise,
                                 const SdeConfig& config, std::span<const double> times,
                                 bool run_ode = true);

/// Trace of the leading n×n block.
double position_trace(const Mat& P, Eigen::Index n);

}  // namespace optlaws::sde
