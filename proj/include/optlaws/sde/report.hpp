#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "optlaws/sde/bounds.hpp"
#include "optlaws/sde/noise.hpp"
#include "optlaws/sde/objective.hpp"
#include "optlaws/sde/simulate.hpp"

namespace optlaws::sde {

/// Everything a `simulate` run needs, parsed from a JSON document:
///   {"objective": {"name": "quadratic", "dim": 4, "scale": 1} |
///                 {"name": "quadratic", "hessian": [[..]], "center": [..]},
///    "noise": {"variance": v} | {"sigma": [[..]]}, optional "samples", "prop3_constant",
///    "schedule": {...}, "eta0", "horizon", "paths", "seed", "algorithm",
///    "adam": {"c1", "c1_hat" | "c1_prime", "c2", "eps"},
///    "x0": [..] | number, "m0", "v0", "x_star", "trap_eps", "momentum_checkpoints",
///    "threads", "constants": {"L", "f_min", "ell", "sigma0", "sigma_bar", "V", "M"}}
struct SimulationSpec {
  std::shared_ptr<Objective> objective;
  std::shared_ptr<NoiseModel> noise;
  SdeConfig config;
  BoundConstants constants;
  nlohmann::json echo;
};

/// `default_seed` applies when the document has no "seed".
SimulationSpec simulation_spec_from_json(const nlohmann::json& doc, std::uint64_t default_seed);

/// Runs the simulation and checks it against the bounds. The report holds the
/// config echo, per-statistic {mean, std_err, n}, bound values, per-invariant
/// verdicts and an overall "passed".
nlohmann::json simulation_report(const SimulationSpec& spec, SimulationResult* result = nullptr);

/// CSV with header path,t,x_norm,grad_norm.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& traces);

/// Names accepted by validation_suite.
std::vector<std::string> validation_suite_names();

/// Runs one built-in Monte-Carlo / numerical suite. `quick` shrinks sample
/// counts. The result has "passed" and per-case details.
nlohmann::json validation_suite(const std::string& name, bool quick, std::uint64_t seed);

}  // namespace optlaws::sde
