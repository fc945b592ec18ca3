#include "optlaws/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "optlaws/divergence.hpp"
#include "optlaws/error.hpp"
#include "optlaws/io.hpp"
#include "optlaws/law.hpp"
#include "optlaws/sde/report.hpp"

namespace optlaws::cli {

namespace {

using nlohmann::json;

std::uint64_t env_seed() {
  const char* s = std::getenv("OPTLAWS_SEED");
  if (!s || !*s) return 0;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("OPTLAWS_SEED must be a nonnegative integer");
  }
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

FittedLaw load_law(const std::string& path, const std::string& mode) {
  FittedLaw law = path == "reference" ? FittedLaw::reference() : io::law_from_json(io::read_json(path));
  if (!mode.empty()) law = law.with_mode(law_mode_from_string(mode));
  return law;
}

std::optional<PretrainContext> load_pretrain(const FittedLaw& law, const std::string& path) {
  if (path.empty()) {
    if (law.mode == LawMode::continual)
      throw InvalidArgument("a continual law needs --pretrain");
    return std::nullopt;
  }
  return PretrainContext{io::config_from_json(io::read_json(path)).schedule};
}

json gate_json(const DivergenceResult& g) {
  return {{"R", g.R}, {"eta_L", g.eta_L}, {"verdict", std::string(to_string(g.verdict))}};
}

void emit(std::ostream& out, const json& doc, const std::string& path) {
  if (!path.empty()) io::write_json(path, doc);
  out << io::dump(doc);
}

std::vector<double> expand(const std::vector<double>& values, const std::vector<double>& range,
                           const char* what) {
  if (!values.empty() && !range.empty())
    throw InvalidArgument(std::string("give either ") + what + " values or a range, not both");
  if (!range.empty()) {
    if (range.size() != 3 || range[2] < 1 || range[2] != std::floor(range[2]))
      throw InvalidArgument(std::string(what) + " range must be lo,hi,count");
    const auto n = static_cast<int>(range[2]);
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
      out.push_back(n == 1 ? range[0] : range[0] + (range[1] - range[0]) * i / (n - 1));
    return out;
  }
  if (values.empty()) throw InvalidArgument(std::string(what) + " grid is empty");
  return values;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-rate schedule scaling laws and SDE checks", "optlaws"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // fit
  std::string runs_path, law_out, report_path, policy = "a1/a3/a2", terms = "full",
                                               cooldown = "linear";
  double token_length = 0.0, batch = 0.0, lr_scale = Normalizer{}.lr_scale;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a law to a run-log CSV");
  fit_cmd->add_option("--runs", runs_path, "Run-log CSV")->required();
  fit_cmd->add_option("--out", law_out, "Where to write the law JSON")->required();
  fit_cmd->add_option("--report", report_path, "Residual report JSON");
  fit_cmd->add_option("--policy", policy, "Marker policy, e.g. a1/a3/a2");
  fit_cmd->add_option("--terms", terms, "full or compact");
  fit_cmd->add_option("--cooldown", cooldown, "linear or cosine");
  fit_cmd->add_option("--lr-scale", lr_scale, "Raw LR divisor");
  fit_cmd->add_option("--token-length", token_length, "Tokens per sequence; CSV sizes are steps");
  fit_cmd->add_option("--batch", batch, "Sequences per step; CSV sizes are steps");

  // predict
  std::string law_path, config_path, pretrain_path, mode, out_path;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the final loss of one config");
  predict_cmd->add_option("--law", law_path, "Law JSON or 'reference'")->required();
  predict_cmd->add_option("--config", config_path, "Config JSON")->required();
  predict_cmd->add_option("--pretrain", pretrain_path, "Pre-training config (continual mode)");
  predict_cmd->add_option("--mode", mode, "Override the law mode: pretrain or continual");
  predict_cmd->add_option("--out", out_path, "Also write the prediction here");

  // rank
  std::string configs_path;
  auto* rank_cmd = app.add_subcommand("rank", "Rank configs by predicted loss");
  rank_cmd->add_option("--law", law_path, "Law JSON or 'reference'")->required();
  rank_cmd->add_option("--configs", configs_path, "JSON array of configs")->required();
  rank_cmd->add_option("--pretrain", pretrain_path, "Pre-training config (continual mode)");
  rank_cmd->add_option("--mode", mode, "Override the law mode");
  rank_cmd->add_option("--out", out_path, "Also write the ranking here");

  // check
  double eta_max = 0.0, warmup = 0.0, model = 0.0, tokens = 0.0;
  auto* check_cmd = app.add_subcommand("check", "Evaluate the divergence criterion");
  check_cmd->add_option("--eta-max", eta_max, "Peak rate (raw LR with --token-length/--batch)")
      ->required();
  check_cmd->add_option("--warmup", warmup, "Warmup length (steps with --token-length/--batch)")
      ->required();
  check_cmd->add_option("--model", model, "Model size in billions")->required();
  check_cmd->add_option("--tokens", tokens, "Horizon (steps with --token-length/--batch)")
      ->required();
  check_cmd->add_option("--token-length", token_length, "Tokens per sequence");
  check_cmd->add_option("--batch", batch, "Sequences per step");
  check_cmd->add_option("--lr-scale", lr_scale, "Raw LR divisor");
  check_cmd->add_option("--out", out_path, "Also write the result here");

  // sweep
  std::vector<double> eta_values, eta_range, warmup_values, warmup_range;
  double sentinel = kDivergedLoss;
  auto* sweep_cmd = app.add_subcommand("sweep", "Predicted-loss grid over peak rate and warmup");
  sweep_cmd->add_option("--law", law_path, "Law JSON or 'reference'")->required();
  sweep_cmd->add_option("--eta-values", eta_values, "Peak rates")->delimiter(',');
  sweep_cmd->add_option("--eta-range", eta_range, "lo,hi,count")->delimiter(',');
  sweep_cmd->add_option("--warmup-values", warmup_values, "Warmup lengths")->delimiter(',');
  sweep_cmd->add_option("--warmup-range", warmup_range, "lo,hi,count")->delimiter(',');
  sweep_cmd->add_option("--model", model, "Model size in billions")->required();
  sweep_cmd->add_option("--tokens", tokens, "Horizon in billions of tokens")->required();
  sweep_cmd->add_option("--sentinel", sentinel, "Loss written for gated cells");
  sweep_cmd->add_option("--out", out_path, "Grid CSV (stdout when absent)");

  // simulate
  std::string trace_path;
  std::optional<std::uint64_t> seed_flag;
  std::size_t trace_paths = 0, trace_stride = 0;
  unsigned threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Run an SDE simulation and check its bounds");
  sim_cmd->add_option("--config", config_path, "Simulation config JSON")->required();
  sim_cmd->add_option("--out", out_path, "Report JSON");
  sim_cmd->add_option("--trace", trace_path, "Per-path trace CSV");
  sim_cmd->add_option("--trace-paths", trace_paths, "Paths traced (default 1 with --trace)");
  sim_cmd->add_option("--trace-stride", trace_stride, "Steps between trace rows");
  sim_cmd->add_option("--threads", threads, "Worker threads");
  sim_cmd->add_option("--seed", seed_flag, "Seed (overrides config and OPTLAWS_SEED)");

  // validate
  std::vector<std::string> suites;
  bool quick = false;
  auto* val_cmd = app.add_subcommand("validate", "Run built-in numerical validation suites");
  val_cmd->add_option("--suite", suites, "Suite name (repeatable; default all)");
  val_cmd->add_flag("--quick", quick, "Smaller sample counts");
  val_cmd->add_option("--out", out_path, "Report JSON");
  val_cmd->add_option("--seed", seed_flag, "Seed (overrides OPTLAWS_SEED)");

  if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "error: unknown subcommand '" << args.front() << "'\n";
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Normalizer normalizer;
    normalizer.lr_scale = lr_scale;
    const bool raw = token_length > 0.0 || batch > 0.0;
    if (raw && !(token_length > 0.0 && batch > 0.0))
      throw InvalidArgument("--token-length and --batch must be given together");

    if (*fit_cmd) {
      std::vector<RunRecord> runs = io::read_runs_csv(runs_path);
      if (raw) {
        for (RunRecord& r : runs) {
          r.tokens = normalizer.tokens(r.tokens, token_length, batch);
          r.markers = {normalizer.tokens(r.markers.a1, token_length, batch),
                       normalizer.tokens(r.markers.a2, token_length, batch),
                       normalizer.tokens(r.markers.a3, token_length, batch)};
        }
      }
      FitOptions opts;
      opts.policy = PolicyRule::parse(policy);
      opts.terms = term_set_from_string(terms);
      opts.normalizer = normalizer;
      if (cooldown == "cosine")
        opts.cooldown = CooldownShape::cosine;
      else if (cooldown != "linear")
        throw InvalidArgument("--cooldown must be linear or cosine");
      const FittedLaw law = fit(runs, opts);
      io::write_json(law_out, io::to_json(law));
      json residuals = json::array();
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].diverged) continue;
        const Prediction p =
            predict(law, Config{runs[i].schedule(normalizer, opts.cooldown), runs[i].model, ""});
        residuals.push_back({{"row", i + 1},
                             {"loss", runs[i].loss},
                             {"predicted", p.loss},
                             {"log_residual", std::log(runs[i].loss) - p.log_loss}});
      }
      const json report{{"law", law_out},
                        {"rows", law.rows},
                        {"residual_rms", law.residual_rms},
                        {"residual_max", law.residual_max},
                        {"condition_number", law.condition_number},
                        {"residuals", residuals}};
      emit(out, report, report_path);
      return kExitOk;
    }

    if (*predict_cmd) {
      const FittedLaw law = load_law(law_path, mode);
      const auto pre = load_pretrain(law, pretrain_path);
      const Config cfg = io::config_from_json(io::read_json(config_path));
      const FeatureVector fv = law_features(law, cfg, pre ? &*pre : nullptr);
      const Prediction p = predict(law, fv);
      const double peak = cfg.schedule.peak();
      const json doc{
          {"label", cfg.label},
          {"loss", p.loss},
          {"log_loss", p.log_loss},
          {"features", io::to_json(fv)},
          {"gate", gate_json(criterion_R(peak, cfg.schedule.markers().a1, cfg.model,
                                         cfg.tokens()))},
          {"reference_only", law.reference_only}};
      emit(out, doc, out_path);
      return kExitOk;
    }

    if (*rank_cmd) {
      const FittedLaw law = load_law(law_path, mode);
      const auto pre = load_pretrain(law, pretrain_path);
      json list = io::read_json(configs_path);
      if (list.is_object() && list.contains("configs")) list = list["configs"];
      if (!list.is_array()) throw DataError("configs must be a JSON array");
      if (list.empty()) throw InvalidArgument("rank needs at least one config");
      std::vector<Config> configs;
      for (const json& c : list) configs.push_back(io::config_from_json(c));
      const auto ranked = rank(law, configs, {}, pre ? &*pre : nullptr);
      json rows = json::array();
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        const RankEntry& e = ranked[i];
        rows.push_back({{"rank", i + 1},
                        {"index", e.index},
                        {"label", e.label},
                        {"loss", e.prediction.loss},
                        {"log_loss", e.prediction.log_loss},
                        {"eta_max", e.eta_max},
                        {"warmup", e.warmup},
                        {"gate", gate_json(e.gate)}});
      }
      emit(out, json{{"ranking", rows}, {"reference_only", law.reference_only}}, out_path);
      return kExitOk;
    }

    if (*check_cmd) {
      const DivergenceResult g =
          raw ? criterion_R_raw(eta_max, warmup, model, tokens, token_length, batch, normalizer)
              : criterion_R(eta_max, warmup, model, tokens);
      json doc = gate_json(g);
      doc["inputs"] = {{"eta_max", eta_max}, {"warmup", warmup}, {"model", model},
                       {"tokens", tokens}, {"raw_units", raw}};
      emit(out, doc, out_path);
      return kExitOk;
    }

    if (*sweep_cmd) {
      const FittedLaw law = load_law(law_path, "");
      const auto etas = expand(eta_values, eta_range, "eta");
      const auto warmups = expand(warmup_values, warmup_range, "warmup");
      const auto cells = sweep_grid(law, {}, etas, warmups, model, tokens, sentinel);
      std::ostringstream csv;
      csv << "warmup,eta_max,R,gated,loss\n";
      for (const SweepCell& c : cells)
        csv << fmt(c.warmup) << ',' << fmt(c.eta_max) << ',' << fmt(c.R) << ','
            << (c.gated ? 1 : 0) << ',' << fmt(c.loss) << '\n';
      if (out_path.empty()) {
        out << csv.str();
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!(f << csv.str())) throw DataError("cannot write " + out_path);
      }
      return kExitOk;
    }

    if (*sim_cmd) {
      sde::SimulationSpec spec =
          sde::simulation_spec_from_json(io::read_json(config_path), env_seed());
      if (seed_flag) spec.config.seed = *seed_flag;
      if (threads > 0) spec.config.threads = threads;
      if (!trace_path.empty()) {
        spec.config.trace_paths = trace_paths > 0 ? trace_paths : std::max<std::size_t>(1, spec.config.trace_paths);
        if (trace_stride > 0) spec.config.trace_stride = trace_stride;
      }
      spec.echo["seed"] = spec.config.seed;
      sde::SimulationResult result;
      const json report = sde::simulation_report(spec, &result);
      if (!trace_path.empty()) {
        std::ofstream f(trace_path, std::ios::binary);
        sde::write_trace_csv(f, result.traces);
        if (!f) throw DataError("cannot write " + trace_path);
      }
      emit(out, report, out_path);
      return report.at("passed").get<bool>() ? kExitOk : kExitValidation;
    }

    if (*val_cmd) {
      const std::uint64_t seed = seed_flag.value_or(env_seed());
      if (suites.empty()) suites = sde::validation_suite_names();
      json results = json::object();
      bool passed = true;
      for (const std::string& s : suites) {
        json r = sde::validation_suite(s, quick, seed);
        passed = passed && r.at("passed").get<bool>();
        results[s] = std::move(r);
      }
      emit(out, json{{"passed", passed}, {"suites", results}}, out_path);
      return passed ? kExitOk : kExitValidation;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace optlaws::cli
