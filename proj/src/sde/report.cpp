#include "optlaws/sde/report.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "optlaws/error.hpp"
#include "optlaws/io.hpp"
#include "optlaws/sde/checks.hpp"
#include "optlaws/sde/gaussian.hpp"

namespace optlaws::sde {

using nlohmann::json;

namespace {

Vec vec_from_json(const json& j, Eigen::Index n, const char* what) {
  Vec v;
  if (j.is_number()) {
    v = Vec::Constant(n, j.get<double>());
  } else if (j.is_array()) {
    v.resize(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  } else {
    throw DataError(std::string(what) + " must be a number or an array");
  }
  if (v.size() != n) throw DataError(std::string(what) + " has the wrong dimension");
  return v;
}

Mat mat_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw DataError(std::string(what) + " must be a nonempty matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw DataError(std::string(what) + " must be square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

json stat_json(const Statistic& s) {
  return {{"mean", s.mean}, {"std_err", s.std_err}, {"n", s.n}};
}

json check(bool pass, double lhs, double rhs) {
  return {{"pass", pass}, {"observed", lhs}, {"bound", rhs}};
}

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

bool all_passed(const json& checks) {
  for (const auto& [k, v] : checks.items())
    if (!v.at("pass").get<bool>()) return false;
  return true;
}

Mat random_spd(std::mt19937_64& gen, Eigen::Index n, double lo, double hi) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  Mat A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(gen);
  const Eigen::HouseholderQR<Mat> qr(A);
  const Mat Q = qr.householderQ();
  Vec d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = ud(gen);
  return Q * d.asDiagonal() * Q.transpose();
}

std::vector<Schedule> suite_schedules(double S) {
  return {Schedule::constant(1.0, S), Schedule::warmup_cooldown(1.0, 0.1 * S, S),
          Schedule::warmup_cooldown(1.0, 0.2 * S, S, CooldownShape::cosine)};
}

json gaussian_suite(bool quick, std::uint64_t seed) {
  std::mt19937_64 gen(mix_seed(seed, 101));
  json cases = json::object();
  const double S = 10.0;
  std::vector<double> times;
  const int n_times = quick ? 10 : 50;
  for (int i = 1; i <= n_times; ++i) times.push_back(S * i / n_times);
  const auto schedules = suite_schedules(S);
  for (int algo = 0; algo < 2; ++algo) {
    const Eigen::Index n = algo == 0 ? (quick ? 4 : 8) : (quick ? 2 : 4);
    for (std::size_t k = 0; k < schedules.size(); ++k) {
      Quadratic f(random_spd(gen, n, 0.2, 2.0));
      NoiseModel noise(random_spd(gen, n, 0.1, 1.0));
      SdeConfig cfg;
      cfg.schedule = schedules[k];
      cfg.eta0 = 0.05;
      cfg.algorithm = algo == 0 ? Algorithm::sgd : Algorithm::adam;
      cfg.x0 = Vec::Ones(n);
      const GaussianProcess gp = gaussian_process(f, noise, cfg, times);
      double worst = 0.0, min_eig = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double scale = 1.0 + gp.ode[i].cwiseAbs().maxCoeff();
        worst = std::max(worst, (gp.closed_form[i] - gp.ode[i]).cwiseAbs().maxCoeff() / scale);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(gp.closed_form[i])
                                        .eigenvalues()
                                        .minCoeff());
      }
      const std::string name = std::string(to_string(cfg.algorithm)) + "_schedule" +
                               std::to_string(k);
      cases[name + "_closed_vs_ode"] = check(worst <= 1e-6, worst, 1e-6);
      cases[name + "_psd"] = check(min_eig >= -1e-10, min_eig, -1e-10);
    }
  }
  return cases;
}

json anti_concentration_suite(bool quick, std::uint64_t seed) {
  std::mt19937_64 gen(mix_seed(seed, 202));
  json cases = json::object();
  const std::size_t samples = quick ? 100000 : 1000000;
  for (Eigen::Index n : {1, 4, 16}) {
    const Mat sigma = random_spd(gen, n, 0.2, 2.0);
    const double tr = sigma.trace();
    const std::vector<double> eps{0.02 * tr / std::exp(1.0), 0.3 * tr / std::exp(1.0),
                                  0.9 * tr / std::exp(1.0)};
    const auto rows = anti_concentration_check(Vec::Zero(n), sigma, eps, samples,
                                               mix_seed(seed, static_cast<std::uint64_t>(n)));
    for (std::size_t i = 0; i < rows.size(); ++i)
      cases["n" + std::to_string(n) + "_eps" + std::to_string(i)] =
          check(rows[i].frequency <= rows[i].bound, rows[i].frequency, rows[i].bound);
  }
  return cases;
}

json random_matrix_suite(bool quick, std::uint64_t seed) {
  json cases = json::object();
  const Eigen::Index n = quick ? 16 : 64;
  const std::size_t trials = quick ? 1000 : 10000;
  std::vector<double> t_grid;
  for (int i = 1; i <= 10; ++i) t_grid.push_back(0.6 * i);
  const RandomMatrixReport rep =
      random_matrix_checks(Mat::Identity(n, n), static_cast<std::size_t>(n), trials, t_grid, seed);
  for (const auto& row : rep.trace_deviation) {
    char key[32];
    std::snprintf(key, sizeof key, "t_%.1f", row.t);
    cases[key] = check(row.frequency <= row.bernstein, row.frequency, row.bernstein);
  }
  return cases;
}

json simulation_suite(bool quick, std::uint64_t seed, bool trapping) {
  json cases = json::object();
  const Eigen::Index n = 4;
  const double S = 10.0;
  const auto schedules = suite_schedules(S);
  for (int algo = 0; algo < (trapping ? 1 : 2); ++algo) {
    for (std::size_t k = 0; k < schedules.size(); ++k) {
      SimulationSpec spec;
      spec.objective = std::make_shared<Quadratic>(Mat::Identity(n, n));
      spec.noise = std::make_shared<NoiseModel>(NoiseModel::isotropic(n, 0.5));
      spec.config.schedule = schedules[k];
      spec.config.eta0 = 0.01;
      spec.config.n_paths = quick ? 400 : 4000;
      spec.config.seed = mix_seed(seed, k);
      spec.config.algorithm = algo == 0 ? Algorithm::sgd : Algorithm::adam;
      spec.config.x0 = Vec::Constant(n, 2.0);
      if (trapping) spec.config.trap_eps = {0.01, 0.05, 0.1};
      const json rep = simulation_report(spec);
      const std::string prefix =
          std::string(to_string(spec.config.algorithm)) + "_schedule" + std::to_string(k) + "_";
      for (const auto& [name, v] : rep.at("invariants").items()) {
        if (trapping != (name.rfind("trapped", 0) == 0)) continue;
        cases[prefix + name] = v;
      }
    }
  }
  return cases;
}

}  // namespace

SimulationSpec simulation_spec_from_json(const json& doc, std::uint64_t default_seed) {
  if (!doc.is_object()) throw DataError("simulation config must be a JSON object");
  SimulationSpec spec;
  spec.echo = doc;
  try {
    const json& obj = doc.at("objective");
    const std::string name = obj.at("name").get<std::string>();
    if (name == "quadratic" && obj.contains("hessian")) {
      const Mat H = mat_from_json(obj["hessian"], "hessian");
      std::optional<Vec> center;
      if (obj.contains("center")) center = vec_from_json(obj["center"], H.rows(), "center");
      spec.objective = std::make_shared<Quadratic>(H, center);
    } else {
      spec.objective = make_objective(name, obj.at("dim").get<Eigen::Index>(),
                                      obj.value("scale", 1.0));
    }
    const Eigen::Index n = spec.objective->dim();

    const json noise = doc.value("noise", json::object());
    const std::size_t samples = noise.value("samples", std::size_t{0});
    const double C = noise.value("prop3_constant", 1.0);
    const Mat sigma = noise.contains("sigma")
                          ? mat_from_json(noise["sigma"], "noise sigma")
                          : Mat(noise.value("variance", 1.0) * Mat::Identity(n, n));
    if (sigma.rows() != n) throw DataError("noise sigma has the wrong dimension");
    spec.noise = std::make_shared<NoiseModel>(sigma, samples, C);

    SdeConfig& c = spec.config;
    c.schedule = io::schedule_from_json(doc.at("schedule"));
    c.eta0 = doc.value("eta0", c.eta0);
    if (doc.contains("horizon")) c.horizon = doc["horizon"].get<double>();
    c.n_paths = doc.value("paths", c.n_paths);
    c.seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : default_seed;
    c.algorithm = algorithm_from_string(doc.value("algorithm", std::string("sgd")));
    if (doc.contains("adam")) {
      const json& a = doc["adam"];
      const double c1 = a.value("c1", 1.0);
      c.adam = a.contains("c1_prime")
                   ? AdamConstants{c1, a["c1_prime"].get<double>(), a.value("c2", 1.0),
                                   a.value("eps", 1e-8)}
                   : AdamConstants::from_discrete(c1, a.value("c1_hat", 0.1), a.value("c2", 1.0),
                                                  a.value("eps", 1e-8));
    }
    c.x0 = vec_from_json(doc.at("x0"), n, "x0");
    if (doc.contains("m0")) c.m0 = vec_from_json(doc["m0"], n, "m0");
    if (doc.contains("v0")) c.v0 = vec_from_json(doc["v0"], n, "v0");
    if (doc.contains("x_star")) c.x_star = vec_from_json(doc["x_star"], n, "x_star");
    c.trap_eps = doc.value("trap_eps", std::vector<double>{});
    c.momentum_checkpoints = doc.value("momentum_checkpoints", std::size_t{0});
    c.trace_paths = doc.value("trace_paths", std::size_t{0});
    c.trace_stride = doc.value("trace_stride", std::size_t{1});
    c.threads = doc.value("threads", 1u);

    const json k = doc.value("constants", json::object());
    spec.constants.L = opt_number(k, "L");
    spec.constants.f_min = opt_number(k, "f_min");
    spec.constants.ell = opt_number(k, "ell");
    spec.constants.sigma0 = opt_number(k, "sigma0");
    spec.constants.sigma_bar = opt_number(k, "sigma_bar");
    spec.constants.V = opt_number(k, "V");
    spec.constants.M = opt_number(k, "M");
  } catch (const json::exception& e) {
    throw DataError(std::string("simulation config: ") + e.what());
  }
  spec.config.validate(spec.objective->dim());
  return spec;
}

json simulation_report(const SimulationSpec& spec, SimulationResult* result_out) {
  const Objective& f = *spec.objective;
  const NoiseModel& noise = *spec.noise;
  const SdeConfig& cfg = spec.config;
  const SimulationResult r = simulate(f, noise, cfg);
  const bool adam = cfg.algorithm == Algorithm::adam;
  const double T = cfg.end_time();

  json stats = json::object();
  stats["weighted_grad_sq"] = stat_json(r.weighted_grad_sq);
  if (adam) stats["weighted_momentum_sq"] = stat_json(r.weighted_momentum_sq);
  stats["final_sq_distance"] = stat_json(r.final_sq_distance);
  json trapped = json::array();
  for (const auto& t : r.trapped)
    trapped.push_back({{"eps", t.eps}, {"frequency", stat_json(t.frequency)}});
  stats["trapped"] = trapped;
  if (!r.momentum.empty()) {
    json mom = json::array();
    for (const auto& m : r.momentum)
      mom.push_back({{"t", m.t}, {"mean_norm", m.mean_norm}, {"std_err", m.std_err}});
    stats["momentum_mean"] = mom;
  }
  if (adam) stats["min_v"] = r.min_v;

  json bounds = json::object();
  json inv = json::object();
  const ConvergenceBound cb = convergence_bound(f, noise, cfg, T, spec.constants);
  if (cb.gradient) {
    bounds["gradient"] = *cb.gradient;
    const double lhs = r.weighted_grad_sq.mean;
    inv["gradient_bound"] = check(lhs <= *cb.gradient + 3.0 * r.weighted_grad_sq.std_err, lhs,
                                  *cb.gradient);
  }
  if (cb.momentum) {
    bounds["momentum"] = *cb.momentum;
    const double lhs = r.weighted_momentum_sq.mean;
    inv["momentum_bound"] = check(lhs <= *cb.momentum + 3.0 * r.weighted_momentum_sq.std_err,
                                  lhs, *cb.momentum);
  }
  if (adam) inv["v_nonnegative"] = check(r.min_v >= 0.0, r.min_v, 0.0);
  const std::optional<double> ell = spec.constants.ell ? spec.constants.ell : f.constants().ell;
  if (ell && !r.momentum.empty()) {
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& m : r.momentum) {
      worst = std::max(worst, m.mean_norm);
      ok = ok && m.mean_norm <= *ell + 3.0 * m.std_err;
    }
    inv["momentum_mean_bounded"] = check(ok, worst, *ell);
  }

  // Trapping bounds need the Gaussian law of X_T; it is exact only for SGD
  // on a quadratic with Gaussian noise.
  const Vec x_star = cfg.x_star.value_or(f.minimizer());
  if (!r.trapped.empty() && f.gradient(x_star).norm() <= 1e-8) {
    const std::vector<double> at{T};
    const GaussianProcess gp = gaussian_process(f, noise, cfg, at, false);
    const double tr = position_trace(gp.closed_form.front(), f.dim());
    const bool exact = !adam && f.name() == "quadratic" && noise.samples() == 0;
    bounds["covariance_trace"] = tr;
    bounds["trapping_exact"] = exact;
    json trap = json::array();
    for (const auto& t : r.trapped) {
      if (!(tr > 0.0)) break;
      const EscapeBounds eb = escape_bounds(tr, t.eps);
      trap.push_back({{"eps", t.eps},
                      {"trapped_upper", eb.trapped_upper},
                      {"escape_lower", eb.escape_lower},
                      {"vacuous", eb.vacuous}});
      if (exact) {
        char key[48];
        std::snprintf(key, sizeof key, "trapped_eps_%g", t.eps);
        inv[key] = check(t.frequency.mean <= eb.trapped_upper + 3.0 * t.frequency.std_err,
                         t.frequency.mean, eb.trapped_upper);
      }
    }
    bounds["trapping"] = trap;
  }

  json rep;
  rep["config"] = spec.echo;
  rep["steps"] = r.steps;
  rep["statistics"] = stats;
  rep["bounds"] = bounds;
  rep["invariants"] = inv;
  rep["passed"] = all_passed(inv);
  if (result_out) *result_out = r;
  return rep;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& traces) {
  out << "path,t,x_norm,grad_norm\n";
  char buf[128];
  for (const auto& p : traces) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", p.path, p.t, p.x_norm, p.grad_norm);
    out << buf;
  }
}

std::vector<std::string> validation_suite_names() {
  return {"anti_concentration", "convergence", "gaussian", "random_matrix", "trapping"};
}

json validation_suite(const std::string& name, bool quick, std::uint64_t seed) {
  json cases;
  if (name == "gaussian")
    cases = gaussian_suite(quick, seed);
  else if (name == "anti_concentration")
    cases = anti_concentration_suite(quick, seed);
  else if (name == "random_matrix")
    cases = random_matrix_suite(quick, seed);
  else if (name == "convergence")
    cases = simulation_suite(quick, seed, false);
  else if (name == "trapping")
    cases = simulation_suite(quick, seed, true);
  else
    throw InvalidArgument("unknown validation suite '" + name + "'");
  return {{"suite", name}, {"quick", quick}, {"seed", seed}, {"cases", cases},
          {"passed", all_passed(cases)}};
}

}  // namespace optlaws::sde
