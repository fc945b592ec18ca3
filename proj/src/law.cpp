#include "optlaws/law.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

#include "optlaws/error.hpp"

namespace optlaws {

namespace {

constexpr double kRankTolerance = 1e-13;

std::vector<std::size_t> active_columns(TermSet terms) {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (term_active(terms, i)) cols.push_back(i);
  return cols;
}

}  // namespace

RunRecord RunRecord::from_steps(double eta1, double eta2, double a1_steps, double a2_steps,
                                double a3_steps, double total_steps, double token_length,
                                double batch, double model, double loss, bool diverged,
                                const Normalizer& normalizer) {
  auto tok = [&](double steps) { return normalizer.tokens(steps, token_length, batch); };
  RunRecord r;
  r.model = model;
  r.tokens = tok(total_steps);
  r.eta1 = eta1;
  r.eta2 = eta2;
  r.markers = {tok(a1_steps), tok(a2_steps), tok(a3_steps)};
  r.loss = diverged ? kDivergedLoss : loss;
  r.diverged = diverged;
  return r;
}

void RunRecord::validate() const {
  if (!(model > 0.0)) throw DataError("run model size must be positive");
  if (!(tokens > 0.0)) throw DataError("run token count must be positive");
  if (!(eta1 >= 0.0 && eta2 >= 0.0)) throw DataError("run learning rates must be nonnegative");
  if (!diverged && !(loss > 0.0)) throw DataError("non-divergent run needs a positive loss");
  if (diverged && loss != kDivergedLoss) throw DataError("divergent run must carry loss 7.0");
}

Schedule RunRecord::schedule(const Normalizer& normalizer, CooldownShape cooldown) const {
  return Schedule::general(normalizer.rate(eta1), normalizer.rate(eta2), markers, tokens,
                           cooldown);
}

Config config_from_run(const RunRecord& run, const Normalizer& normalizer) {
  return {run.schedule(normalizer), run.model, {}};
}

std::string_view to_string(LawMode mode) {
  return mode == LawMode::continual ? "continual" : "pretrain";
}

LawMode law_mode_from_string(std::string_view name) {
  if (name == "pretrain") return LawMode::pretrain;
  if (name == "continual") return LawMode::continual;
  throw InvalidArgument("law mode must be \"pretrain\" or \"continual\"");
}

FittedLaw FittedLaw::reference() {
  FittedLaw law;
  law.c = {-6.92e-4, -1.27e-3, -4.68e-2, 4.65e-2, 9.62e-3, 1.92e-2, -5.05e-2, -1.82e-1,
           -4.68e-2, -4.18e-2, -1.19e-1, 2.18e-1, 3.1e-1,  6.98e-1, 5.26e-2,  3.14e-1};
  law.reference_only = true;
  return law;
}

FittedLaw FittedLaw::with_mode(LawMode m) const {
  FittedLaw out = *this;
  out.mode = m;
  return out;
}

FittedLaw fit_features(std::span<const FeatureVector> features, std::span<const double> losses,
                       const FitOptions& options) {
  if (features.size() != losses.size())
    throw InvalidArgument("features and losses must have the same length");
  const std::vector<std::size_t> cols = active_columns(options.terms);
  const auto n = static_cast<Eigen::Index>(features.size());
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (n == 0) throw DataError("no fittable rows");
  if (n <= k) {
    std::ostringstream msg;
    msg << "need more than " << k << " non-divergent rows to fit, got " << n;
    throw DataError(msg.str());
  }

  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!(losses[r] > 0.0)) throw DataError("losses must be positive");
    y(r) = std::log(losses[r]);
    for (Eigen::Index j = 0; j < k; ++j) X(r, j) = features[r][cols[j]];
  }

  // Column equilibration keeps the decomposition's pivoting meaningful when
  // terms differ by many orders of magnitude.
  Eigen::VectorXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double m = X.col(j).cwiseAbs().maxCoeff();
    scale(j) = m > 0.0 ? m : 1.0;
    X.col(j) /= scale(j);
  }

  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(X).singularValues();
  const double smax = sv(0);
  const double smin = sv(k - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > kRankTolerance * smax)) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient (condition number " << cond << ")";
    throw RankDeficientError(msg.str(), cond);
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::VectorXd beta = qr.solve(y);
  // One step of iterative refinement.
  beta += qr.solve(y - X * beta);

  const Eigen::VectorXd resid = y - X * beta;
  FittedLaw law;
  law.powers = options.powers;
  law.normalizer = options.normalizer;
  law.policy = options.policy;
  law.terms = options.terms;
  law.rows = static_cast<std::size_t>(n);
  law.condition_number = cond;
  law.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  law.residual_max = resid.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < k; ++j) law.c[cols[j]] = beta(j) / scale(j);
  return law;
}

FittedLaw fit(std::span<const RunRecord> records, const FitOptions& options) {
  std::vector<FeatureVector> features;
  std::vector<double> losses;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunRecord& r = records[i];
    r.validate();
    if (r.diverged) continue;
    const Schedule s = r.schedule(options.normalizer, options.cooldown);
    features.push_back(
        compute_features(s, options.policy.apply(s.markers()), r.tokens, r.model, options.powers));
    losses.push_back(r.loss);
  }
  return fit_features(features, losses, options);
}

FeatureVector continual_features(const FittedLaw& law, const Schedule& pre_schedule,
                                 double pre_tokens, const Config& config) {
  if (law.mode != LawMode::continual)
    throw InvalidArgument("continual features need a law in continual mode");
  if (!(pre_tokens >= 0.0 && pre_tokens <= pre_schedule.horizon()))
    throw InvalidArgument("pre-training horizon must lie within the pre-training schedule");
  const Schedule& ft = config.schedule;
  const double S = ft.horizon();
  const MarkerPolicy policy = law.policy.apply(ft.markers());
  BaseIntegrals in = base_integrals(ft, policy);
  const double tail_peak = ft.peak_on(policy.a_e2, S);
  if (!(tail_peak > 0.0)) throw DomainError("peak rate on the escape interval is zero");
  const double p2 = tail_peak * tail_peak;
  in.tail_deta_sq /= p2 * p2;
  in.warmup_eta += pre_schedule.integral(0.0, pre_tokens, Functional::eta);
  return features_from_integrals(in, S, config.model, ft.peak(), law.powers);
}

FeatureVector law_features(const FittedLaw& law, const Config& config,
                           const PretrainContext* pretrain) {
  if (law.mode == LawMode::continual) {
    if (pretrain == nullptr)
      throw InvalidArgument("continual-mode law needs the pre-training schedule");
    return continual_features(law, pretrain->schedule, pretrain->schedule.horizon(), config);
  }
  const Schedule& s = config.schedule;
  return compute_features(s, law.policy.apply(s.markers()), s.horizon(), config.model,
                          law.powers);
}

Prediction predict(const FittedLaw& law, const FeatureVector& features) {
  double z = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (term_active(law.terms, i)) z += law.c[i] * features[i];
  return {z, std::exp(z)};
}

Prediction predict(const FittedLaw& law, const Config& config, const PretrainContext* pretrain) {
  return predict(law, law_features(law, config, pretrain));
}

std::vector<RankEntry> rank(const FittedLaw& law, std::span<const Config> configs,
                            const DivergenceParams& gate, const PretrainContext* pretrain) {
  if (configs.empty()) throw InvalidArgument("rank needs at least one configuration");
  std::vector<RankEntry> out;
  out.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Config& cfg = configs[i];
    RankEntry e;
    e.index = i;
    e.label = cfg.label;
    e.prediction = predict(law, cfg, pretrain);
    e.eta_max = cfg.schedule.peak();
    e.warmup = cfg.schedule.markers().a1;
    e.gate = criterion_R(e.eta_max, e.warmup, cfg.model, cfg.tokens(), gate);
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& x, const RankEntry& y) {
    return std::tuple(x.gate.diverged(), x.prediction.log_loss, x.eta_max, x.warmup, x.index) <
           std::tuple(y.gate.diverged(), y.prediction.log_loss, y.eta_max, y.warmup, y.index);
  });
  return out;
}

std::vector<SweepCell> sweep_grid(const FittedLaw& law, const DivergenceParams& gate,
                                  std::span<const double> eta_values,
                                  std::span<const double> warmup_values, double model,
                                  double tokens, double sentinel) {
  if (eta_values.empty() || warmup_values.empty())
    throw InvalidArgument("sweep ranges must be nonempty");
  std::vector<SweepCell> cells;
  cells.reserve(eta_values.size() * warmup_values.size());
  for (double w : warmup_values) {
    for (double eta : eta_values) {
      if (!(eta > 0.0 && w > 0.0)) throw InvalidArgument("sweep values must be positive");
      SweepCell cell{eta, w};
      const DivergenceResult g = criterion_R(eta, w, model, tokens, gate);
      cell.R = g.R;
      cell.gated = g.diverged();
      if (cell.gated) {
        cell.loss = sentinel;
      } else {
        const Config cfg{Schedule::warmup_cooldown(eta, w, tokens), model, {}};
        cell.loss = predict(law, cfg).loss;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

void SimpleLaw::validate() const {
  for (double v : {c1, c2, c3_bias, c4, c5, alpha1, alpha2, alpha3, alpha4})
    if (!(v > 0.0)) throw InvalidArgument("fixed-size law constants must be strictly positive");
  if (!std::isfinite(b)) throw InvalidArgument("bias b must be finite");
}

double simple_law_eval(const SimpleLaw& law, const Schedule& schedule, double a, double S) {
  law.validate();
  if (S != schedule.horizon()) throw InvalidArgument("S must match the schedule's horizon");
  if (!(a > 0.0 && a < S)) throw InvalidArgument("warmup split must satisfy 0 < a < S");
  const double warm = schedule.integral(0.0, a, Functional::eta);
  const double tail = schedule.integral(a, S, Functional::eta);
  if (!(warm > 0.0)) throw DomainError("warmup integral of the rate is zero");
  if (!(tail > 0.0)) throw DomainError("post-warmup integral of the rate is zero");
  const double warm_d = schedule.integral(0.0, a, Functional::deta_sq);
  const double tail_d = schedule.integral(a, S, Functional::deta_sq);
  return law.c1 * std::pow(warm, -law.alpha1) + law.c2 * std::pow(tail, -law.alpha2) +
         law.c3_bias / S + law.b + law.c4 * std::pow(warm_d, law.alpha3) +
         law.c5 * std::pow(tail_d, law.alpha4);
}

namespace {

void check_ratios(double r_a, double r_ac, double S, double eta_max) {
  if (!(0.0 < r_a && r_a <= r_ac && r_ac < 1.0))
    throw InvalidArgument("ratios must satisfy 0 < r_a <= r_ac < 1");
  if (!(S > 0.0)) throw InvalidArgument("horizon S must be positive");
  if (!(eta_max > 0.0)) throw InvalidArgument("peak rate must be positive");
}

// Terms both schedules share: warmup convergence, bias, warmup escape.
double shared_terms(const SimpleLaw& law, double a, double S, double h) {
  return law.c1 * std::pow(2.0 / (h * a), law.alpha1) + law.c3_bias / S + law.b +
         law.c4 * std::pow(h * h / a, law.alpha3);
}

struct TailTerms {
  double cos_conv, cos_escape, const_conv, const_escape;
};

TailTerms tail_terms(const SimpleLaw& law, double a, double ac, double S, double h) {
  using std::numbers::pi;
  return {
      law.c2 * std::pow(2.0 / (h * (S - a)), law.alpha2),
      law.c5 * std::pow(pi * pi * h * h / (8.0 * (S - a)), law.alpha4),
      law.c2 * std::pow(h * (ac - a) + h * (S - ac) / 2.0, -law.alpha2),
      law.c5 * std::pow(h * h / (S - ac), law.alpha4),
  };
}

}  // namespace

double simple_law_cosine(const SimpleLaw& law, double r_a, double S, double eta_max) {
  law.validate();
  check_ratios(r_a, r_a, S, eta_max);
  const double a = r_a * S;
  const TailTerms t = tail_terms(law, a, a, S, eta_max);
  return shared_terms(law, a, S, eta_max) + t.cos_conv + t.cos_escape;
}

double simple_law_constant(const SimpleLaw& law, double r_a, double r_ac, double S,
                           double eta_max) {
  law.validate();
  check_ratios(r_a, r_ac, S, eta_max);
  const double a = r_a * S;
  const TailTerms t = tail_terms(law, a, r_ac * S, S, eta_max);
  return shared_terms(law, a, S, eta_max) + t.const_conv + t.const_escape;
}

double prop1_gap(const SimpleLaw& law, double r_a, double r_ac, double S, double eta_max) {
  law.validate();
  check_ratios(r_a, r_ac, S, eta_max);
  const TailTerms t = tail_terms(law, r_a * S, r_ac * S, S, eta_max);
  return std::abs((t.cos_conv - t.const_conv) + (t.cos_escape - t.const_escape));
}

}  // namespace optlaws
