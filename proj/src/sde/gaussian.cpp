#include "optlaws/sde/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "optlaws/error.hpp"
#include "optlaws/quadrature.hpp"

namespace optlaws::sde {

namespace {

void check_times(const Schedule& schedule, std::span<const double> times) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev && t <= schedule.horizon()))
      throw InvalidArgument("output times must be sorted and lie in [0, S]");
    prev = t;
  }
}

void check_sde(const LinearSde& sde) {
  const Eigen::Index n = sde.G.rows();
  if (sde.G.cols() != n || sde.Q.rows() != n || sde.Q.cols() != n || sde.P0.rows() != n ||
      sde.P0.cols() != n)
    throw InvalidArgument("linear SDE matrices must be square and of equal size");
}

bool is_symmetric(const Mat& G) {
  return (G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, G.cwiseAbs().maxCoeff());
}

std::vector<double> interior_joints(const Schedule& schedule, double a, double b) {
  std::vector<double> out;
  for (double j : schedule.joints())
    if (j > a && j < b) out.push_back(j);
  return out;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::vector<Mat> covariance_closed_form(const Schedule& schedule, const LinearSde& sde,
                                        std::span<const double> times, double tol) {
  check_sde(sde);
  check_times(schedule, times);
  const Eigen::Index n = sde.G.rows();
  std::vector<Mat> out;
  out.reserve(times.size());

  if (is_symmetric(sde.G)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sde.G + sde.G.transpose()));
    const Mat& V = es.eigenvectors();
    const Vec& lam = es.eigenvalues();
    const Mat Qr = V.transpose() * sde.Q * V;
    Mat Pr = V.transpose() * sde.P0 * V;
    double a = 0.0;
    for (double b : times) {
      if (b > a) {
        const double dI = schedule.integral(a, b, Functional::eta);
        const double scale = schedule.integral(a, b, Functional::eta_sq);
        const std::vector<double> cuts = interior_joints(schedule, a, b);
        quadrature::SimpsonOptions opts;
        opts.abs_tol = tol * std::max(scale, 1e-300);
        Mat J(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = i; j < n; ++j) {
            const double mu = lam[i] + lam[j];
            auto f = [&](double s) {
              const double e = schedule.eval(s);
              return std::exp(-mu * schedule.integral(s, b, Functional::eta)) * e * e;
            };
            J(i, j) = J(j, i) = quadrature::adaptive_simpson(f, a, b, cuts, opts).value;
          }
        }
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            Pr(i, j) = std::exp(-(lam[i] + lam[j]) * dI) * Pr(i, j) + Qr(i, j) * J(i, j);
        a = b;
      }
      out.push_back(V * Pr * V.transpose());
    }
    return out;
  }

  Mat P = sde.P0;
  double a = 0.0;
  for (double b : times) {
    if (b > a) {
      const Mat Phi = (-sde.G * schedule.integral(a, b, Functional::eta)).exp();
      std::vector<double> cuts{a};
      for (double j : interior_joints(schedule, a, b)) cuts.push_back(j);
      cuts.push_back(b);
      auto f = [&](double s) -> Mat {
        const double e = schedule.eval(s);
        const Mat E = (-sde.G * schedule.integral(s, b, Functional::eta)).exp();
        return (e * e) * (E * sde.Q * E.transpose());
      };
      const double scale =
          std::max(schedule.integral(a, b, Functional::eta_sq) * max_abs(sde.Q), 1e-300);
      const Mat noise = quadrature::adaptive_gauss_kronrod<Mat>(
          f, cuts, Mat::Zero(n, n), [](const Mat& m) { return max_abs(m); }, tol * scale);
      P = Phi * P * Phi.transpose() + noise;
      P = 0.5 * (P + P.transpose()).eval();
      a = b;
    }
    out.push_back(P);
  }
  return out;
}

Rk4Report covariance_rk4(const Schedule& schedule, const LinearSde& sde,
                         std::span<const double> times, double rel_tol,
                         std::size_t initial_steps) {
  check_sde(sde);
  check_times(schedule, times);
  if (initial_steps == 0) throw InvalidArgument("initial_steps must be positive");
  Rk4Report report;
  if (times.empty()) return report;

  std::vector<double> stops{0.0};
  for (double j : schedule.joints())
    if (j < times.back()) stops.push_back(j);
  stops.insert(stops.end(), times.begin(), times.end());
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  auto rhs = [&](double t, const Mat& P) -> Mat {
    const double e = schedule.eval(t);
    const Mat GP = sde.G * P;
    return -e * (GP + GP.transpose()) + (e * e) * sde.Q;
  };

  auto solve = [&](double h) {
    std::vector<Mat> vals;
    Mat P = sde.P0;
    std::size_t next = 0;
    while (next < times.size() && times[next] == 0.0) vals.push_back(P), ++next;
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
      const double a = stops[k], b = stops[k + 1];
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h)));
      const double dt = (b - a) / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double t = a + static_cast<double>(i) * dt;
        // Evaluate η inside the piece so a jump at a joint is never straddled.
        const double tl = std::max(t, std::nextafter(a, b));
        const double tr = std::min(t + dt, std::nextafter(b, a));
        const double tm = t + 0.5 * dt;
        const Mat k1 = rhs(tl, P);
        const Mat k2 = rhs(tm, P + 0.5 * dt * k1);
        const Mat k3 = rhs(tm, P + 0.5 * dt * k2);
        const Mat k4 = rhs(tr, P + dt * k3);
        P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      P = 0.5 * (P + P.transpose()).eval();
      while (next < times.size() && times[next] == b) vals.push_back(P), ++next;
    }
    return vals;
  };

  double h = schedule.horizon() / static_cast<double>(initial_steps);
  std::size_t steps = initial_steps;
  std::vector<Mat> prev = solve(h);
  for (int iter = 0; iter < 14; ++iter) {
    h *= 0.5;
    steps *= 2;
    std::vector<Mat> cur = solve(h);
    double change = 0.0, size = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      change = std::max(change, max_abs(cur[i] - prev[i]));
      size = std::max(size, max_abs(cur[i]));
    }
    report.values = std::move(cur);
    report.steps = steps;
    report.change = change;
    if (change <= rel_tol * (1.0 + size)) break;
    prev = report.values;
  }
  return report;
}

GaussianProcess gaussian_process(const Objective& objective, const NoiseModel& noise,
                                 const SdeConfig& config, std::span<const double> times,
                                 bool run_ode) {
  const Eigen::Index n = objective.dim();
  if (noise.dim() != n) throw InvalidArgument("noise dimension does not match the objective");
  if (config.x0.size() != n) throw InvalidArgument("x0 has the wrong dimension");
  const Schedule& schedule = config.schedule;
  check_times(schedule, times);
  const Vec x_star = config.x_star.value_or(objective.minimizer());
  if (x_star.size() != n) throw InvalidArgument("x_star has the wrong dimension");
  if (objective.gradient(x_star).norm() > 1e-8)
    throw DomainError("linearization point is not stationary: |grad f(x*)| > 1e-8");
  const Mat H = objective.hessian(x_star);
  const Mat& S = noise.sigma_g();

  GaussianProcess gp;
  gp.times.assign(times.begin(), times.end());
  LinearSde sde;
  Vec mu0, mu_star;
  if (config.algorithm == Algorithm::sgd) {
    sde.G = H;
    sde.Q = config.eta0 * S;
    sde.P0 = Mat::Zero(n, n);
    mu0 = config.x0;
    mu_star = x_star;
  } else {
    const AdamConstants& ac = config.adam;
    ac.validate();
    const Vec d = S.diagonal();
    sde.G = Mat::Zero(3 * n, 3 * n);
    sde.G.block(0, n, n, n) = (d.array() + ac.eps).rsqrt().matrix().asDiagonal();
    sde.G.block(n, 0, n, n) = -ac.c1 * H;
    sde.G.block(n, n, n, n) = ac.c1 * Mat::Identity(n, n);
    sde.G.block(2 * n, 2 * n, n, n) = ac.c2 * Mat::Identity(n, n);
    sde.Q = Mat::Zero(3 * n, 3 * n);
    sde.Q.block(n, n, n, n) = ac.c1_prime * ac.c1_prime * S;
    sde.P0 = Mat::Zero(3 * n, 3 * n);
    mu0.resize(3 * n);
    mu0 << config.x0, config.m0.value_or(Vec::Zero(n)), config.v0.value_or(d);
    mu_star.resize(3 * n);
    mu_star << x_star, Vec::Zero(n), d;
  }
  for (double t : times) {
    const Mat Phi = (-sde.G * schedule.integral(0.0, t, Functional::eta)).exp();
    gp.mean.push_back((mu_star + Phi * (mu0 - mu_star)).head(n));
  }
  gp.closed_form = covariance_closed_form(schedule, sde, times);
  if (run_ode) {
    gp.ode = covariance_rk4(schedule, sde, times).values;
    for (std::size_t i = 0; i < times.size(); ++i)
      gp.discrepancy = std::max(gp.discrepancy, max_abs(gp.closed_form[i] - gp.ode[i]));
  }
  gp.generator = std::move(sde.G);
  gp.noise = std::move(sde.Q);
  return gp;
}

double position_trace(const Mat& P, Eigen::Index n) {
  if (n > P.rows()) throw InvalidArgument("block larger than the matrix");
  return P.topLeftCorner(n, n).trace();
}

}  // namespace optlaws::sde
