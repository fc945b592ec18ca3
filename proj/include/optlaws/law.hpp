#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optlaws/divergence.hpp"
#include "optlaws/features.hpp"
#include "optlaws/schedule.hpp"

namespace optlaws {

/// Loss recorded for runs that blew up.
inline constexpr double kDivergedLoss = 7.0;

/// One training run. Sizes are already in billions (parameters, tokens);
/// eta1/eta2 are raw learning rates, normalized on use.
struct RunRecord {
  double model = 0.0;
  double tokens = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  Markers markers;
  double loss = 0.0;
  bool diverged = false;

  /// Builds a record from step counts; every step quantity is converted with
  /// `normalizer.tokens(steps, token_length, batch)`.
  static RunRecord from_steps(double eta1, double eta2, double a1_steps, double a2_steps,
                              double a3_steps, double total_steps, double token_length,
                              double batch, double model, double loss, bool diverged,
                              const Normalizer& normalizer = {});

  /// Throws DataError if the record is internally inconsistent.
  void validate() const;

  Schedule schedule(const Normalizer& normalizer,
                    CooldownShape cooldown = CooldownShape::linear) const;
};

/// A candidate configuration: normalized schedule plus model size.
struct Config {
  Schedule schedule;
  double model = 0.0;
  std::string label;

  double tokens() const { return schedule.horizon(); }
};

Config config_from_run(const RunRecord& run, const Normalizer& normalizer = {});

enum class LawMode { pretrain, continual };

std::string_view to_string(LawMode mode);
LawMode law_mode_from_string(std::string_view name);

/// Pre-training history a continual-mode law needs.
struct PretrainContext {
  Schedule schedule;
};

struct FittedLaw {
  std::array<double, kFeatureCount> c{};
  PowerSet powers = PowerSet::reference();
  Normalizer normalizer;
  PolicyRule policy;
  LawMode mode = LawMode::pretrain;
  TermSet terms = TermSet::full;
  double residual_rms = 0.0;
  double residual_max = 0.0;
  double condition_number = 0.0;
  std::size_t rows = 0;
  bool reference_only = false;

  /// Reference coefficients and powers. Fitted to private runs, so any
  /// prediction made with it is for reference only.
  static FittedLaw reference();

  /// Same law with a different mode; c and powers are untouched.
  FittedLaw with_mode(LawMode mode) const;
};

struct FitOptions {
  PowerSet powers = PowerSet::reference();
  PolicyRule policy;
  Normalizer normalizer;
  TermSet terms = TermSet::full;
  CooldownShape cooldown = CooldownShape::linear;
};

/// Least squares of ln(loss) on the feature vectors. Divergent rows are
/// skipped. Throws DataError when fewer rows than active terms remain and
/// RankDeficientError when the design matrix loses rank.
FittedLaw fit(std::span<const RunRecord> records, const FitOptions& options = {});

/// Lower-level fit on precomputed features and positive losses.
FittedLaw fit_features(std::span<const FeatureVector> features, std::span<const double> losses,
                       const FitOptions& options = {});

struct Prediction {
  double log_loss = 0.0;
  double loss = 0.0;
};

/// Features of `config` under the law's marker policy and powers. Continual
/// laws require the pre-training context.
FeatureVector law_features(const FittedLaw& law, const Config& config,
                           const PretrainContext* pretrain = nullptr);

Prediction predict(const FittedLaw& law, const FeatureVector& features);
Prediction predict(const FittedLaw& law, const Config& config,
                   const PretrainContext* pretrain = nullptr);

/// Feature vector with the continual adjustments: the tail escape integral
/// is divided by η_max⁴ (peak of the fine-tune schedule on [a_e2, S]) and
/// the warmup integral gains the whole pre-training integral.
FeatureVector continual_features(const FittedLaw& law, const Schedule& pre_schedule,
                                 double pre_tokens, const Config& config);

struct RankEntry {
  std::size_t index = 0;
  std::string label;
  Prediction prediction;
  double eta_max = 0.0;
  double warmup = 0.0;
  DivergenceResult gate;
};

/// Survivors of the divergence gate ascending by predicted log-loss, then the
/// gated configurations. Ties go to smaller η_max, then smaller a1, then input
/// order.
std::vector<RankEntry> rank(const FittedLaw& law, std::span<const Config> configs,
                            const DivergenceParams& gate = {},
                            const PretrainContext* pretrain = nullptr);

struct SweepCell {
  double eta_max = 0.0;
  double warmup = 0.0;
  double R = 0.0;
  double loss = 0.0;
  bool gated = false;
};

/// Predicted loss over linear warmup / linear cooldown schedules on an
/// (η_max × warmup) grid, warmup-major. Cells with R > 1 carry `sentinel`.
std::vector<SweepCell> sweep_grid(const FittedLaw& law, const DivergenceParams& gate,
                                  std::span<const double> eta_values,
                                  std::span<const double> warmup_values, double model,
                                  double tokens, double sentinel = kDivergedLoss);

/// Constants of the fixed-model-size law
///   c1 (∫₀^a η)^{-α1} + c2 (∫_a^S η)^{-α2} + c3_bias/S + b
///     + c4 (∫₀^a η'²)^{α3} + c5 (∫_a^S η'²)^{α4}.
struct SimpleLaw {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3_bias = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;
  double alpha4 = 1.0;
  double b = 0.0;

  void validate() const;
};

/// Evaluates the fixed-size law on `schedule` with warmup split `a`.
double simple_law_eval(const SimpleLaw& law, const Schedule& schedule, double a, double S);

/// Closed forms of the fixed-size law for warmup + cosine cooldown and for
/// warmup + constant + linear cooldown, with a = r_a S and a_c = r_ac S.
double simple_law_cosine(const SimpleLaw& law, double r_a, double S, double eta_max = 1.0);
double simple_law_constant(const SimpleLaw& law, double r_a, double r_ac, double S,
                           double eta_max = 1.0);

/// |law(cosine) − law(constant)|, from only the terms that differ.
double prop1_gap(const SimpleLaw& law, double r_a, double r_ac, double S, double eta_max = 1.0);

}  // namespace optlaws
