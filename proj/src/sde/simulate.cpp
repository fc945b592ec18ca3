#include "optlaws/sde/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "optlaws/error.hpp"

namespace optlaws::sde {

namespace {

constexpr std::size_t kChunk = 256;

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  void merge(const Accumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  Statistic stat() const {
    if (n == 0) return {};
    const double N = static_cast<double>(n);
    const double mean = sum / N;
    const double var = n > 1 ? std::max(0.0, (sum_sq - N * mean * mean) / (N - 1.0)) : 0.0;
    return {mean, std::sqrt(var / N), n};
  }
};

struct ChunkResult {
  Accumulator grad, momentum, dist;
  std::vector<Accumulator> trapped;
  Vec final_sum;
  std::vector<Vec> m_sum, m_sq;
  double min_v = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> traces;
};

std::size_t step_count(const SdeConfig& c) {
  const double T = c.end_time();
  const double k = std::round(T / c.eta0);
  if (std::abs(k * c.eta0 - T) > 1e-9 * std::max(1.0, T)) {
    std::ostringstream msg;
    msg << "horizon " << T << " is not a whole number of steps of size " << c.eta0;
    throw InvalidArgument(msg.str());
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::adam ? "adam" : "sgd";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "sgd") return Algorithm::sgd;
  if (name == "adam") return Algorithm::adam;
  throw InvalidArgument("algorithm must be \"sgd\" or \"adam\"");
}

AdamConstants AdamConstants::from_discrete(double c1, double c1_hat, double c2, double eps) {
  if (!(c1 > 0.0 && c1_hat > 0.0)) throw InvalidArgument("c1 and c1_hat must be positive");
  return {c1, std::sqrt(c1 * c1_hat), c2, eps};
}

void AdamConstants::validate() const {
  if (!(c1 > 0.0)) throw InvalidArgument("Adam constant c1 must be positive");
  if (!(c1_prime >= 0.0)) throw InvalidArgument("Adam constant c1' must be nonnegative");
  if (!(c2 > 0.0)) throw InvalidArgument("Adam constant c2 must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("Adam epsilon must be positive");
}

void SdeConfig::validate(Eigen::Index dim) const {
  if (!(eta0 > 0.0)) throw InvalidArgument("eta0 must be positive");
  if (n_paths == 0) throw InvalidArgument("n_paths must be at least 1");
  const double T = end_time();
  if (!(T > 0.0 && T <= schedule.horizon()))
    throw InvalidArgument("simulated horizon must lie in (0, S]");
  if (x0.size() != dim) throw InvalidArgument("x0 has the wrong dimension");
  if (x_star && x_star->size() != dim) throw InvalidArgument("x_star has the wrong dimension");
  for (double e : trap_eps)
    if (!(e > 0.0)) throw InvalidArgument("trapping radius eps must be positive");
  if (trace_stride == 0) throw InvalidArgument("trace stride must be positive");
  if (algorithm == Algorithm::adam) {
    adam.validate();
    if (m0 && m0->size() != dim) throw InvalidArgument("m0 has the wrong dimension");
    if (v0 && (v0->size() != dim || (v0->array() < 0.0).any()))
      throw InvalidArgument("v0 must have the right dimension and be nonnegative");
    if (adam.c2 * schedule.peak() * eta0 > 1.0)
      throw InvalidArgument("c2 * eta_max * eta0 must not exceed 1 or v can turn negative");
  }
  step_count(*this);
}

SimulationResult simulate(const Objective& objective, const NoiseModel& noise,
                          const SdeConfig& config) {
  const Eigen::Index n = objective.dim();
  if (noise.dim() != n) throw InvalidArgument("noise dimension does not match the objective");
  config.validate(n);
  const bool adam = config.algorithm == Algorithm::adam;
  const std::size_t K = step_count(config);
  const double dt = config.eta0;
  const double sqrt_dt = std::sqrt(dt);
  const AdamConstants& ac = config.adam;
  const Vec x_star = config.x_star.value_or(objective.minimizer());

  std::vector<double> eta(K);
  for (std::size_t k = 0; k < K; ++k) eta[k] = config.schedule.eval(static_cast<double>(k) * dt);

  std::vector<std::size_t> checkpoints;
  if (adam && config.momentum_checkpoints > 0) {
    const std::size_t C = config.momentum_checkpoints;
    for (std::size_t j = 0; j <= C; ++j) checkpoints.push_back(j * K / C);
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  }

  const std::size_t n_chunks = (config.n_paths + kChunk - 1) / kChunk;
  std::vector<ChunkResult> chunks(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    ChunkResult& out = chunks[c];
    out.trapped.resize(config.trap_eps.size());
    out.final_sum = Vec::Zero(n);
    out.m_sum.assign(checkpoints.size(), Vec::Zero(n));
    out.m_sq.assign(checkpoints.size(), Vec::Zero(n));
    Vec x(n), m(n), v(n), g(n), z(n), scratch(n), diag(n), step(n);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(config.n_paths, begin + kChunk);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(config.seed, p);
      x = config.x0;
      if (adam) {
        m = config.m0.value_or(Vec::Zero(n));
        v = config.v0.value_or(Vec::Zero(n));
        out.min_v = std::min(out.min_v, v.minCoeff());
      }
      const bool trace = p < config.trace_paths;
      double w_sum = 0.0, g_sum = 0.0, m_sum = 0.0;
      std::size_t next_cp = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const double e = eta[k];
        objective.gradient(x, g);
        const double g2 = g.squaredNorm();
        w_sum += e;
        g_sum += e * g2;
        if (adam) m_sum += e * m.squaredNorm();
        if (trace && k % config.trace_stride == 0)
          out.traces.push_back({p, static_cast<double>(k) * dt, x.norm(), std::sqrt(g2)});
        if (next_cp < checkpoints.size() && checkpoints[next_cp] == k) {
          out.m_sum[next_cp] += m;
          out.m_sq[next_cp] += m.cwiseAbs2();
          ++next_cp;
        }
        if (e == 0.0) continue;
        if (!adam) {
          noise.sample(rng, z, scratch);
          x -= (dt * e) * (g + z);
        } else {
          noise.sample(rng, z, scratch, &diag);
          step = (v.array() + ac.eps).rsqrt() * m.array();
          x -= (e * dt) * step;
          m += (-ac.c1 * e * dt) * (m - g) + (ac.c1_prime * e * sqrt_dt) * z;
          v += (-ac.c2 * e * dt) * (v - diag);
          out.min_v = std::min(out.min_v, v.minCoeff());
        }
        if (!x.allFinite() || (adam && !(m.allFinite() && v.allFinite()))) {
          std::ostringstream msg;
          msg << "diverged path " << p << " at step " << k + 1;
          throw DivergedPath(msg.str(), p, k + 1);
        }
      }
      if (next_cp < checkpoints.size() && checkpoints[next_cp] == K) {
        out.m_sum[next_cp] += m;
        out.m_sq[next_cp] += m.cwiseAbs2();
      }
      if (trace) {
        objective.gradient(x, g);
        out.traces.push_back({p, static_cast<double>(K) * dt, x.norm(), g.norm()});
      }
      out.grad.add(w_sum > 0.0 ? g_sum / w_sum : 0.0);
      out.momentum.add(adam && w_sum > 0.0 ? m_sum / w_sum : 0.0);
      const double d2 = (x - x_star).squaredNorm();
      out.dist.add(d2);
      out.final_sum += x;
      for (std::size_t i = 0; i < config.trap_eps.size(); ++i)
        out.trapped[i].add(d2 <= config.trap_eps[i] ? 1.0 : 0.0);
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, n_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t c = t; c < n_chunks; c += threads) run_chunk(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Chunks merge in index order, so the result is independent of threading.
  SimulationResult res;
  res.steps = K;
  Accumulator grad, momentum, dist;
  std::vector<Accumulator> trapped(config.trap_eps.size());
  Vec final_sum = Vec::Zero(n);
  std::vector<Vec> m_sum(checkpoints.size(), Vec::Zero(n)), m_sq(checkpoints.size(), Vec::Zero(n));
  double min_v = std::numeric_limits<double>::infinity();
  for (ChunkResult& c : chunks) {
    grad.merge(c.grad);
    momentum.merge(c.momentum);
    dist.merge(c.dist);
    for (std::size_t i = 0; i < trapped.size(); ++i) trapped[i].merge(c.trapped[i]);
    final_sum += c.final_sum;
    for (std::size_t j = 0; j < checkpoints.size(); ++j) {
      m_sum[j] += c.m_sum[j];
      m_sq[j] += c.m_sq[j];
    }
    min_v = std::min(min_v, c.min_v);
    res.traces.insert(res.traces.end(), c.traces.begin(), c.traces.end());
  }
  const double P = static_cast<double>(config.n_paths);
  res.weighted_grad_sq = grad.stat();
  res.weighted_momentum_sq = momentum.stat();
  res.final_sq_distance = dist.stat();
  res.final_mean = final_sum / P;
  for (std::size_t i = 0; i < trapped.size(); ++i)
    res.trapped.push_back({config.trap_eps[i], trapped[i].stat()});
  for (std::size_t j = 0; j < checkpoints.size(); ++j) {
    const Vec mean = m_sum[j] / P;
    const double var_sum =
        config.n_paths > 1 ? std::max(0.0, (m_sq[j] - P * mean.cwiseAbs2()).sum() / (P - 1.0)) : 0.0;
    res.momentum.push_back(
        {static_cast<double>(checkpoints[j]) * dt, mean.norm(), std::sqrt(var_sum / P)});
  }
  res.min_v = adam ? min_v : 0.0;
  return res;
}

}  // namespace optlaws::sde
