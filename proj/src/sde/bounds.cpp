#include "optlaws/sde/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "optlaws/error.hpp"

namespace optlaws::sde {

namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw InvalidArgument(std::string("convergence bound needs constant ") + name);
  return *v;
}

}  // namespace

ConvergenceBound convergence_bound(const Objective& objective, const NoiseModel& noise,
                                   const SdeConfig& config, double t,
                                   const BoundConstants& k) {
  const Schedule& s = config.schedule;
  if (!(t > 0.0 && t <= s.horizon())) throw InvalidArgument("bound time must lie in (0, S]");
  const double I1 = s.integral(0.0, t, Functional::eta);
  const double I2 = s.integral(0.0, t, Functional::eta_sq);
  if (!(I1 > 0.0)) throw DomainError("∫η over [0, t] is zero");
  if (config.x0.size() != objective.dim()) throw InvalidArgument("x0 has the wrong dimension");
  const ObjectiveConstants oc = objective.constants();
  const double f_min = need(k.f_min ? k.f_min : oc.f_min, "f_min");
  const double f0 = objective.value(config.x0);
  const double N = static_cast<double>(objective.dim());

  ConvergenceBound out;
  if (config.algorithm == Algorithm::sgd) {
    const double L = k.L.value_or(oc.L);
    const double s0 = k.sigma0.value_or(noise.sigma0());
    out.gradient = (f0 - f_min) / I1 + config.eta0 * L * s0 * s0 * N * I2 / (2.0 * I1);
    return out;
  }

  const AdamConstants& a = config.adam;
  a.validate();
  if (!(a.c2 < 4.0 * a.c1)) throw InvalidArgument("Adam bound requires c2 < 4 c1");
  const Eigen::Index n = objective.dim();
  const Vec m0 = config.m0.value_or(Vec::Zero(n));
  const Vec v0 = config.v0.value_or(Vec::Zero(n));
  std::optional<double> sigma_bar = k.sigma_bar;
  if (!sigma_bar && noise.samples() == 0) sigma_bar = noise.sigma_g_scale() * noise.sigma_g_scale();
  const double sb = need(sigma_bar, "sigma_bar");
  const double V =
      k.V.value_or(std::max(v0.cwiseAbs().maxCoeff(), noise.sigma_g().diagonal().maxCoeff()));
  const double eps = a.eps;
  const double root = std::sqrt(V + eps);
  const double shrink = 1.0 - a.c2 / (4.0 * a.c1);
  const Vec scaled_m0 = m0.array() / (v0.array() + eps).sqrt();

  // E[avg ‖m‖²] ≤ √(V+ε)(f0 + ⟨m0/√(v0+ε), m0⟩/(2c1) − f_min)/((1 − c2/(4c1)) ∫η)
  //             + (c1'²/(2c1)) σ̄ √(V+ε) ∫η² / ((1 − c2/(4c1)) √ε ∫η)
  const double m_bound =
      root * (f0 + scaled_m0.dot(m0) / (2.0 * a.c1) - f_min) / (shrink * I1) +
      (a.c1_prime * a.c1_prime / (2.0 * a.c1)) * sb * root * I2 / (shrink * std::sqrt(eps) * I1);
  out.momentum = m_bound;

  const std::optional<double> ell = k.ell ? k.ell : oc.ell;
  if (ell && k.M) {
    const double L = k.L.value_or(oc.L);
    const Vec g0 = objective.gradient(config.x0);
    const double first = 2.0 * root *
                         (f0 - g0.dot(scaled_m0) / a.c1 - f_min +
                          (*ell) * (*k.M) * std::sqrt(N) / (a.c1 * std::sqrt(eps))) /
                         I1;
    const double mult = 2.0 * L * root / (a.c1 * eps) +
                        (1.0 + sb * sb / (eps * eps)) * a.c2 * a.c2 * (V + eps) /
                            (2.0 * a.c1 * a.c1 * eps);
    out.gradient = first + mult * m_bound;
  }
  return out;
}

EscapeBounds escape_bounds(double trace, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  if (!(trace > 0.0)) throw InvalidArgument("covariance trace must be positive");
  EscapeBounds out;
  const double e = std::numbers::e;
  if (eps == 0.0) return out;
  out.vacuous = e * eps >= trace * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
  const double raw = std::sqrt(e * eps / trace);
  out.trapped_upper = out.vacuous ? 1.0 : raw;
  out.escape_lower = std::clamp(1.0 - raw, 0.0, 1.0);
  if (out.vacuous) out.escape_lower = 0.0;
  out.chernoff =
      eps >= trace ? 1.0
                   : std::min(1.0, std::sqrt(eps / trace) * std::exp((trace - eps) / (2.0 * trace)));
  return out;
}

double escape_order(const Schedule& schedule, double T, double trace_sigma_g, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  if (!(trace_sigma_g > 0.0)) throw InvalidArgument("Tr Σ_g must be positive");
  const double peak = schedule.peak_on(0.0, T);
  if (!(peak > 0.0)) throw DomainError("schedule peak on [0, T] is zero");
  const double p2 = peak * peak;
  return std::sqrt(eps * schedule.integral(0.0, T, Functional::deta_sq) /
                   (p2 * p2 * trace_sigma_g));
}

}  // namespace optlaws::sde
