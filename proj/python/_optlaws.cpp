#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <json.hpp>

#include "optlaws/divergence.hpp"
#include "optlaws/error.hpp"
#include "optlaws/features.hpp"
#include "optlaws/io.hpp"
#include "optlaws/law.hpp"
#include "optlaws/schedule.hpp"
#include "optlaws/sde/report.hpp"

namespace py = pybind11;
using namespace optlaws;
using nlohmann::json;

namespace {

Functional functional_from(const std::string& name) {
  if (name == "eta") return Functional::eta;
  if (name == "eta_sq") return Functional::eta_sq;
  if (name == "deta_sq") return Functional::deta_sq;
  throw InvalidArgument("functional must be eta, eta_sq or deta_sq");
}

CooldownShape shape_from(const std::string& name) {
  if (name == "linear") return CooldownShape::linear;
  if (name == "cosine") return CooldownShape::cosine;
  throw InvalidArgument("cooldown must be linear or cosine");
}

FittedLaw law_from(const std::string& text) {
  if (text == "reference") return FittedLaw::reference();
  return io::law_from_json(json::parse(text));
}

json gate(const DivergenceResult& g) {
  return {{"R", g.R}, {"eta_L", g.eta_L}, {"verdict", std::string(to_string(g.verdict))}};
}

std::string fit_csv(const std::string& path, const std::string& policy, const std::string& terms,
                    const std::string& cooldown) {
  FitOptions opts;
  opts.policy = PolicyRule::parse(policy);
  opts.terms = term_set_from_string(terms);
  opts.cooldown = shape_from(cooldown);
  const auto runs = io::read_runs_csv(std::filesystem::path(path));
  return io::dump(io::to_json(fit(runs, opts)));
}

std::string predict_json(const std::string& law_text, const std::string& config_text) {
  const FittedLaw law = law_from(law_text);
  const Config cfg = io::config_from_json(json::parse(config_text));
  const FeatureVector fv = law_features(law, cfg);
  const Prediction p = predict(law, fv);
  const json doc{{"label", cfg.label},
                 {"loss", p.loss},
                 {"log_loss", p.log_loss},
                 {"features", io::to_json(fv)},
                 {"gate", gate(criterion_R(cfg.schedule.peak(), cfg.schedule.markers().a1,
                                           cfg.model, cfg.tokens()))},
                 {"reference_only", law.reference_only}};
  return io::dump(doc);
}

std::string rank_json(const std::string& law_text, const std::string& configs_text) {
  const FittedLaw law = law_from(law_text);
  const json list = json::parse(configs_text);
  if (!list.is_array() || list.empty()) throw InvalidArgument("rank needs a non-empty list");
  std::vector<Config> configs;
  for (const json& c : list) configs.push_back(io::config_from_json(c));
  json rows = json::array();
  const auto ranked = rank(law, configs);
  for (std::size_t i = 0; i < ranked.size(); ++i)
    rows.push_back({{"rank", i + 1},
                    {"index", ranked[i].index},
                    {"label", ranked[i].label},
                    {"loss", ranked[i].prediction.loss},
                    {"gate", gate(ranked[i].gate)}});
  return io::dump(rows);
}

std::string simulate_json(const std::string& spec_text, std::uint64_t seed) {
  return io::dump(sde::simulation_report(sde::simulation_spec_from_json(json::parse(spec_text), seed)));
}

}  // namespace

PYBIND11_MODULE(_optlaws, m) {
  m.doc() = "Schedule-aware loss laws, divergence gate and SDE checks";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const optlaws::Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Schedule>(m, "Schedule")
      .def_static("general",
                  [](double e1, double e2, double a1, double a2, double a3, double S,
                     const std::string& cooldown) {
                    return Schedule::general(e1, e2, {a1, a2, a3}, S, shape_from(cooldown));
                  },
                  py::arg("eta1"), py::arg("eta2"), py::arg("a1"), py::arg("a2"), py::arg("a3"),
                  py::arg("horizon"), py::arg("cooldown") = "linear")
      .def_static("warmup_cooldown",
                  [](double peak, double warmup, double S, const std::string& cooldown) {
                    return Schedule::warmup_cooldown(peak, warmup, S, shape_from(cooldown));
                  },
                  py::arg("peak"), py::arg("warmup"), py::arg("horizon"),
                  py::arg("cooldown") = "linear")
      .def_static("constant", &Schedule::constant, py::arg("rate"), py::arg("horizon"))
      .def_static("from_json",
                  [](const std::string& text) { return io::schedule_from_json(json::parse(text)); })
      .def("to_json", [](const Schedule& s) { return io::dump(io::to_json(s)); })
      .def("__call__", &Schedule::eval)
      .def("integral",
           [](const Schedule& s, double u, double v, const std::string& fn) {
             return s.integral(u, v, functional_from(fn));
           },
           py::arg("u"), py::arg("v"), py::arg("functional") = "eta")
      .def_property_readonly("horizon", &Schedule::horizon)
      .def_property_readonly("peak", &Schedule::peak)
      .def_property_readonly("markers", [](const Schedule& s) {
        return py::make_tuple(s.markers().a1, s.markers().a2, s.markers().a3);
      });

  m.def("features",
        [](const Schedule& s, double horizon, double model) {
          const FeatureVector fv = compute_features(s, default_markers(s), horizon, model);
          return std::vector<double>(fv.values().begin(), fv.values().end());
        },
        py::arg("schedule"), py::arg("horizon"), py::arg("model"));
  m.def("feature_names", [] {
    std::vector<std::string> out;
    for (auto n : feature_names()) out.emplace_back(n);
    return out;
  });
  m.def("criterion",
        [](double eta_max, double warmup, double model, double tokens) {
          return io::dump(gate(criterion_R(eta_max, warmup, model, tokens)));
        },
        py::arg("eta_max"), py::arg("warmup"), py::arg("model"), py::arg("tokens"));
  m.def("fit_csv", &fit_csv, py::arg("path"), py::arg("policy") = "a1/a3/a2",
        py::arg("terms") = "full", py::arg("cooldown") = "linear");
  m.def("predict", &predict_json, py::arg("law"), py::arg("config"));
  m.def("rank", &rank_json, py::arg("law"), py::arg("configs"));
  m.def("simulate", &simulate_json, py::arg("spec"), py::arg("seed") = 0);
  m.def("validate",
        [](const std::string& suite, bool quick, std::uint64_t seed) {
          return io::dump(sde::validation_suite(suite, quick, seed));
        },
        py::arg("suite"), py::arg("quick") = true, py::arg("seed") = 0);
}
