#pragma once

#include <string_view>

#include "optlaws/features.hpp"

namespace optlaws {

/// Fitted constants of the divergence criterion. All must be positive.
struct DivergenceParams {
  double c1_hat = 1.76;
  double c2_hat = 33.21;
  double c3_hat = 292.03;
  double alpha1_hat = 0.218;
  double alpha2_hat = 0.5;

  void validate() const;
};

enum class Verdict { stable, diverge };

std::string_view to_string(Verdict verdict);

struct DivergenceResult {
  double R = 0.0;
  double eta_L = 0.0;
  Verdict verdict = Verdict::stable;

  bool diverged() const { return verdict == Verdict::diverge; }
};

/// Critical-rate criterion. `warmup` and `tokens` are the normalized Ŝ, â1
/// before squaring; the squaring happens here:
///   S = Ŝ², a1 = â1², η_L = min(η_max, ĉ1 S^α̂1 / (ĉ2 N^α̂2)),
///   R = S (η_max − η_L)² / (ĉ3 a1 η_L²), diverge iff R > 1.
DivergenceResult criterion_R(double eta_max, double warmup, double model, double tokens,
                             const DivergenceParams& params = {});

/// Same criterion from raw units: peak LR, warmup and total steps, converted
/// through `normalizer` once before evaluation.
DivergenceResult criterion_R_raw(double raw_eta_max, double warmup_steps, double model,
                                 double total_steps, double token_length, double batch,
                                 const Normalizer& normalizer,
                                 const DivergenceParams& params = {});

}  // namespace optlaws
