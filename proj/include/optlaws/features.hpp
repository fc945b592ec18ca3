#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "optlaws/schedule.hpp"

namespace optlaws {

inline constexpr std::size_t kFeatureCount = 16;

/// Unit conventions shared by fitting, prediction and the divergence gate.
/// Raw LR is divided by `lr_scale`; step counts become billions of tokens via
/// steps × token_length × batch / token_divisor; model size is in billions.
struct Normalizer {
  double lr_scale = 1.5e-2;
  double token_divisor = 1e9;

  double rate(double raw_lr) const { return raw_lr / lr_scale; }
  double tokens(double steps, double token_length, double batch) const {
    return steps * token_length * batch / token_divisor;
  }
};

/// Split points for the convergence (c) and escape (e) integrals.
struct MarkerPolicy {
  double a_c1 = 0.0;
  double a_c2 = 0.0;
  double a_e1 = 0.0;
  double a_e2 = 0.0;

  /// Throws InvalidArgument unless 0 ≤ a_c1 ≤ a_c2 ≤ S and 0 ≤ a_e1 ≤ a_e2 ≤ S.
  void validate(double horizon) const;
};

/// Which schedule marker feeds each policy slot; "a1/a3/a2" means
/// a_c1 = a1, a_c2 = a3, a_e1 = a_e2 = a2.
struct PolicyRule {
  int convergence_start = 1;
  int convergence_end = 3;
  int escape = 2;

  static PolicyRule parse(std::string_view text);
  std::string to_string() const;
  MarkerPolicy apply(const Markers& markers) const;
};

/// a_c1 = a1, a_c2 = a3, a_e1 = a_e2 = a2.
MarkerPolicy default_markers(const Schedule& schedule);

/// Per-term exponents in table order (convergence, escape, mixed, bias).
struct PowerSet {
  std::array<double, kFeatureCount> values{};

  /// Default exponents, paired with the reference coefficients.
  static PowerSet reference();
  double operator[](std::size_t i) const { return values[i]; }
};

/// Names of the 16 terms in serialization order.
std::span<const std::string_view, kFeatureCount> feature_names();

/// Whether the four escape terms take part in a law. The compact form keeps
/// only convergence, mixed and bias terms (12 entries).
enum class TermSet { full, compact };

std::string_view to_string(TermSet terms);
TermSet term_set_from_string(std::string_view name);
bool term_active(TermSet terms, std::size_t index);

/// Schedule integrals the feature vector is built from.
struct BaseIntegrals {
  double warmup_eta = 0.0;      // ∫_0^{a_c1} η
  double tail_eta = 0.0;        // ∫_{a_c2}^S η
  double warmup_deta_sq = 0.0;  // ∫_0^{a_e1} η'²
  double tail_deta_sq = 0.0;    // ∫_{a_e2}^S η'²
};

BaseIntegrals base_integrals(const Schedule& schedule, const MarkerPolicy& policy);

struct FeatureEntry {
  std::string_view name;
  double power;
  double value;
};

/// The 16 optimization features of one configuration: convergence[0..3],
/// escape[4..7], mixed[8..11], bias[12..15] with bias[15] = 1.
class FeatureVector {
 public:
  FeatureVector(const std::array<double, kFeatureCount>& values, const PowerSet& powers);

  double operator[](std::size_t i) const { return values_[i]; }
  const std::array<double, kFeatureCount>& values() const { return values_; }
  const PowerSet& powers() const { return powers_; }
  FeatureEntry entry(std::size_t i) const;

  std::span<const double, 4> convergence() const { return std::span(values_).subspan<0, 4>(); }
  std::span<const double, 4> escape() const { return std::span(values_).subspan<4, 4>(); }
  std::span<const double, 4> mixed() const { return std::span(values_).subspan<8, 4>(); }
  std::span<const double, 4> bias() const { return std::span(values_).subspan<12, 4>(); }

 private:
  std::array<double, kFeatureCount> values_;
  PowerSet powers_;
};

/// Builds the feature vector from precomputed integrals. Raises DomainError,
/// naming the term, when a zero integral lands in a denominator or a result
/// is not finite.
FeatureVector features_from_integrals(const BaseIntegrals& integrals, double horizon,
                                      double model_size, double eta_max,
                                      const PowerSet& powers = PowerSet::reference());

/// Feature vector of `schedule` for a model of `model_size` billion
/// parameters trained over `horizon` billion tokens.
FeatureVector compute_features(const Schedule& schedule, const MarkerPolicy& policy,
                               double horizon, double model_size,
                               const PowerSet& powers = PowerSet::reference());

}  // namespace optlaws
