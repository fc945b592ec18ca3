#include "optlaws/features.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "optlaws/error.hpp"

namespace optlaws {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames{
    "inv_warmup_eta",
    "inv_tail_eta",
    "model_over_tail_eta",
    "warmup_eta_times_tail_eta",
    "tail_deta_sq",
    "warmup_deta_sq",
    "tail_deta_sq_pow",
    "tokens_times_model",
    "tail_deta_sq_over_warmup_eta",
    "tail_deta_sq_over_tail_eta",
    "model_tail_deta_sq_over_warmup_eta",
    "model_tail_deta_sq_over_tail_eta",
    "model",
    "tokens",
    "eta_max",
    "one",
};

double marker_value(const Markers& m, int which) {
  switch (which) {
    case 1:
      return m.a1;
    case 2:
      return m.a2;
    case 3:
      return m.a3;
  }
  throw InvalidArgument("marker index must be 1, 2 or 3");
}

}  // namespace

void MarkerPolicy::validate(double horizon) const {
  if (!(0.0 <= a_c1 && a_c1 <= a_c2 && a_c2 <= horizon))
    throw InvalidArgument("marker policy requires 0 <= a_c1 <= a_c2 <= S");
  if (!(0.0 <= a_e1 && a_e1 <= a_e2 && a_e2 <= horizon))
    throw InvalidArgument("marker policy requires 0 <= a_e1 <= a_e2 <= S");
}

PolicyRule PolicyRule::parse(std::string_view text) {
  // Expected form "aX/aY/aZ" with X, Y, Z in {1, 2, 3}.
  if (text.size() != 8 || text[0] != 'a' || text[2] != '/' || text[3] != 'a' ||
      text[5] != '/' || text[6] != 'a')
    throw InvalidArgument("policy must look like \"a1/a3/a2\", got \"" + std::string(text) + "\"");
  auto digit = [&](char c) {
    if (c < '1' || c > '3') throw InvalidArgument("policy markers must be a1, a2 or a3");
    return c - '0';
  };
  PolicyRule rule{digit(text[1]), digit(text[4]), digit(text[7])};
  if (rule.convergence_start > rule.convergence_end)
    throw InvalidArgument("policy convergence split must not run backwards");
  return rule;
}

std::string PolicyRule::to_string() const {
  std::ostringstream out;
  out << 'a' << convergence_start << "/a" << convergence_end << "/a" << escape;
  return out.str();
}

MarkerPolicy PolicyRule::apply(const Markers& markers) const {
  const double e = marker_value(markers, escape);
  return {marker_value(markers, convergence_start), marker_value(markers, convergence_end), e, e};
}

MarkerPolicy default_markers(const Schedule& schedule) {
  const Markers& m = schedule.markers();
  return {m.a1, m.a3, m.a2, m.a2};
}

PowerSet PowerSet::reference() {
  return {{-1.0, -1.0, 0.25, -0.23,  //
           1.0, 0.25, 0.25, -0.25,   //
           0.2, 0.15, 0.15, 0.15,    //
           -0.25, -0.25, 0.2, 1.0}};
}

std::span<const std::string_view, kFeatureCount> feature_names() { return kNames; }

std::string_view to_string(TermSet terms) { return terms == TermSet::full ? "full" : "compact"; }

TermSet term_set_from_string(std::string_view name) {
  if (name == "full") return TermSet::full;
  if (name == "compact") return TermSet::compact;
  throw InvalidArgument("term set must be \"full\" or \"compact\"");
}

bool term_active(TermSet terms, std::size_t index) {
  return terms == TermSet::full || index < 4 || index >= 8;
}

BaseIntegrals base_integrals(const Schedule& schedule, const MarkerPolicy& policy) {
  const double S = schedule.horizon();
  policy.validate(S);
  return {
      schedule.integral(0.0, policy.a_c1, Functional::eta),
      schedule.integral(policy.a_c2, S, Functional::eta),
      schedule.integral(0.0, policy.a_e1, Functional::deta_sq),
      schedule.integral(policy.a_e2, S, Functional::deta_sq),
  };
}

FeatureVector::FeatureVector(const std::array<double, kFeatureCount>& values,
                             const PowerSet& powers)
    : values_(values), powers_(powers) {}

FeatureEntry FeatureVector::entry(std::size_t i) const {
  return {kNames.at(i), powers_[i], values_[i]};
}

FeatureVector features_from_integrals(const BaseIntegrals& in, double horizon,
                                      double model_size, double eta_max,
                                      const PowerSet& powers) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon S must be positive");
  if (!(model_size > 0.0)) throw InvalidArgument("model size N must be positive");
  const double N = model_size;
  const double S = horizon;
  auto need_positive = [](double v, std::size_t term, const char* integral) {
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "feature '" << kNames[term] << "' divides by " << integral << " = " << v;
      throw DomainError(msg.str());
    }
  };
  // Every term whose base contains a warmup or tail integral in a denominator.
  for (std::size_t t : {0u, 3u, 8u, 10u}) need_positive(in.warmup_eta, t, "∫_0^{a_c1} η");
  for (std::size_t t : {1u, 2u, 3u, 9u, 11u}) need_positive(in.tail_eta, t, "∫_{a_c2}^S η");

  const std::array<double, kFeatureCount> base{
      in.warmup_eta,
      in.tail_eta,
      N / in.tail_eta,
      in.warmup_eta * in.tail_eta,
      in.tail_deta_sq,
      in.warmup_deta_sq,
      in.tail_deta_sq,
      S * N,
      in.tail_deta_sq / in.warmup_eta,
      in.tail_deta_sq / in.tail_eta,
      N * in.tail_deta_sq / in.warmup_eta,
      N * in.tail_deta_sq / in.tail_eta,
      N,
      S,
      eta_max,
      1.0,
  };
  std::array<double, kFeatureCount> values{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    values[i] = powers[i] == 1.0 ? base[i] : std::pow(base[i], powers[i]);
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream msg;
      msg << "feature '" << kNames[i] << "' is not finite and nonnegative (base " << base[i]
          << ", power " << powers[i] << ")";
      throw DomainError(msg.str());
    }
  }
  values[15] = 1.0;
  return FeatureVector(values, powers);
}

FeatureVector compute_features(const Schedule& schedule, const MarkerPolicy& policy,
                               double horizon, double model_size, const PowerSet& powers) {
  if (horizon != schedule.horizon())
    throw InvalidArgument("horizon S must match the schedule's horizon");
  return features_from_integrals(base_integrals(schedule, policy), horizon, model_size,
                                 schedule.peak(), powers);
}

}  // namespace optlaws
