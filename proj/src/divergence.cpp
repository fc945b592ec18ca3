#include "optlaws/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "optlaws/error.hpp"

namespace optlaws {

void DivergenceParams::validate() const {
  if (!(c1_hat > 0.0 && c2_hat > 0.0 && c3_hat > 0.0 && alpha1_hat > 0.0 && alpha2_hat > 0.0))
    throw InvalidArgument("divergence constants must all be strictly positive");
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::diverge ? "diverge" : "stable";
}

DivergenceResult criterion_R(double eta_max, double warmup, double model, double tokens,
                             const DivergenceParams& p) {
  p.validate();
  if (!(eta_max > 0.0 && warmup > 0.0 && model > 0.0 && tokens > 0.0))
    throw InvalidArgument("criterion inputs eta_max, warmup, model and tokens must be positive");
  const double S = tokens * tokens;
  const double a1 = warmup * warmup;
  const double threshold = p.c1_hat * std::pow(S, p.alpha1_hat) /
                           (p.c2_hat * std::pow(model, p.alpha2_hat));
  const double eta_L = std::min(eta_max, threshold);
  if (!(eta_L > 0.0)) throw DomainError("critical rate eta_L is zero");
  const double excess = eta_max - eta_L;
  const double R = S * excess * excess / (p.c3_hat * a1 * eta_L * eta_L);
  return {R, eta_L, R > 1.0 ? Verdict::diverge : Verdict::stable};
}

DivergenceResult criterion_R_raw(double raw_eta_max, double warmup_steps, double model,
                                 double total_steps, double token_length, double batch,
                                 const Normalizer& normalizer, const DivergenceParams& params) {
  return criterion_R(normalizer.rate(raw_eta_max),
                     normalizer.tokens(warmup_steps, token_length, batch), model,
                     normalizer.tokens(total_steps, token_length, batch), params);
}

}  // namespace optlaws
