#include "optlaws/sde/checks.hpp"

#include <cmath>

#include "optlaws/error.hpp"
#include "optlaws/sde/bounds.hpp"
#include "optlaws/sde/noise.hpp"

namespace optlaws::sde {

std::vector<AntiConcentrationRow> anti_concentration_check(const Vec& mu, const Mat& sigma,
                                                           std::span<const double> eps,
                                                           std::size_t samples,
                                                           std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("samples must be positive");
  if (sigma.rows() != mu.size()) throw InvalidArgument("sigma does not match mu");
  const NoiseModel noise(sigma);
  if (noise.is_zero()) throw InvalidArgument("covariance trace must be positive");
  const double tr = noise.trace();
  const Eigen::Index n = mu.size();
  std::vector<std::size_t> hits(eps.size(), 0);
  Vec z(n), scratch(n);
  PathRng rng(seed, 0);
  for (std::size_t s = 0; s < samples; ++s) {
    noise.sample(rng, z, scratch);
    const double r2 = z.squaredNorm();
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (r2 <= eps[i]) ++hits[i];
  }
  std::vector<AntiConcentrationRow> out;
  const double S = static_cast<double>(samples);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const EscapeBounds b = escape_bounds(tr, eps[i]);
    const double p = static_cast<double>(hits[i]) / S;
    out.push_back({eps[i], p, std::sqrt(p * (1.0 - p) / S), b.trapped_upper, b.vacuous});
  }
  return out;
}

RandomMatrixReport random_matrix_checks(const Mat& sigma_g, std::size_t samples,
                                        std::size_t trials, std::span<const double> t_grid,
                                        std::uint64_t seed) {
  if (samples == 0 || trials == 0) throw InvalidArgument("samples and trials must be positive");
  const NoiseModel noise(sigma_g);
  const Eigen::Index n = sigma_g.rows();
  RandomMatrixReport rep;
  rep.dim = static_cast<std::size_t>(n);
  rep.samples = samples;
  rep.trials = trials;
  const double D = static_cast<double>(samples);
  const double N = static_cast<double>(n);
  const double tr = noise.trace();
  const double tr_sq = sigma_g.squaredNorm();
  rep.sigma_g_sq = noise.sigma_g_scale() * noise.sigma_g_scale();

  std::vector<std::size_t> hits(t_grid.size(), 0);
  double lam_sum = 0.0, lam_sq = 0.0;
  Mat Z(n, static_cast<Eigen::Index>(samples));
  Vec scratch(n);
  for (std::size_t k = 0; k < trials; ++k) {
    PathRng rng(seed, k);
    for (Eigen::Index d = 0; d < Z.cols(); ++d) noise.sample(rng, Z.col(d), scratch);
    const double dev = std::abs(Z.squaredNorm() / D - tr);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      if (dev >= t_grid[i]) ++hits[i];
    const Mat cov = (Z * Z.transpose()) / D;
    const double lam = Eigen::SelfAdjointEigenSolver<Mat>(cov, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .maxCoeff();
    lam_sum += lam;
    lam_sq += lam * lam;
  }
  const double T = static_cast<double>(trials);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const double denom = 4.0 * tr_sq + 2.0 * t * rep.sigma_g_sq;
    const double rhs = denom > 0.0 ? std::min(1.0, 2.0 * std::exp(-D * t * t / denom)) : 0.0;
    rep.trace_deviation.push_back({t, static_cast<double>(hits[i]) / T, rhs});
  }
  rep.mean_lambda_max = lam_sum / T;
  rep.lambda_max_std_err =
      trials > 1 ? std::sqrt(std::max(0.0, (lam_sq - T * rep.mean_lambda_max * rep.mean_lambda_max) /
                                               (T - 1.0)) /
                             T)
                 : 0.0;
  rep.prop3_bound = (1.0 + std::sqrt(D / N)) * rep.sigma_g_sq;
  rep.edge_bound = std::pow(1.0 + std::sqrt(N / D), 2) * rep.sigma_g_sq;
  rep.prop3_residual = rep.mean_lambda_max - rep.prop3_bound;
  return rep;
}

}  // namespace optlaws::sde
