#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace optlaws::quadrature {

struct Result {
  double value = 0.0;
  std::size_t intervals = 0;
  bool converged = true;
};

struct SimpsonOptions {
  double abs_tol = 1e-12;
  std::size_t max_intervals = 1'000'000;
  int max_depth = 60;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  const SimpsonOptions& opts;
  std::size_t intervals = 0;
  bool converged = true;
};

template <class F>
double simpson_recurse(SimpsonState<F>& st, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  ++st.intervals;
  if (depth <= 0 || st.intervals >= st.opts.max_intervals) {
    st.converged = false;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. The tolerance budget is split
/// evenly between halves, so the total absolute error targets `abs_tol`.
template <class F>
Result adaptive_simpson(F&& f, double a, double b, const SimpsonOptions& opts = {}) {
  if (!(b > a)) return {0.0, 0, true};
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState<std::remove_reference_t<F>> st{f, opts};
  const double v =
      detail::simpson_recurse(st, a, b, fa, fm, fb, whole, opts.abs_tol, opts.max_depth);
  return {v, st.intervals, st.converged};
}

/// Adaptive Simpson over [a, b] restarted at every breakpoint inside the
/// interval, so integrands with kinks or jumps at known points converge fast.
template <class F>
Result adaptive_simpson(F&& f, double a, double b, std::span<const double> breakpoints,
                        const SimpsonOptions& opts = {}) {
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  Result total;
  SimpsonOptions piece = opts;
  piece.abs_tol = opts.abs_tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Result r = adaptive_simpson(f, cuts[i], cuts[i + 1], piece);
    total.value += r.value;
    total.intervals += r.intervals;
    total.converged = total.converged && r.converged;
  }
  return total;
}

/// 15-point Gauss-Kronrod nodes on [-1, 1] (positive half, the rest by symmetry).
struct GaussKronrod15 {
  static constexpr std::array<double, 8> nodes{
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> kronrod{
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for the 7-point rule (odd-index Kronrod nodes).
  static constexpr std::array<double, 4> gauss{
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

/// Adaptive Gauss-Kronrod (G7/K15) for integrands valued in any type `V`
/// supporting `V + V`, `double * V` and a caller-supplied norm. Intervals are
/// bisected until the K15-G7 difference per interval is below its share of
/// `tol`; breakpoints seed the initial partition.
template <class V, class F, class Norm>
V adaptive_gauss_kronrod(F&& f, std::span<const double> cuts, V zero, Norm&& norm, double tol,
                         std::size_t max_intervals = 20000) {
  struct Piece {
    double a, b;
  };
  auto rule = [&](double a, double b, V& gk, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    V k = zero;
    V g = zero;
    const V fc = f(c);
    k = k + GaussKronrod15::kronrod[7] * fc;
    g = g + GaussKronrod15::gauss[3] * fc;
    for (int i = 0; i < 7; ++i) {
      const double x = h * GaussKronrod15::nodes[i];
      const V fl = f(c - x);
      const V fr = f(c + x);
      const V s = fl + fr;
      k = k + GaussKronrod15::kronrod[i] * s;
      if (i % 2 == 1) g = g + GaussKronrod15::gauss[i / 2] * s;
    }
    gk = h * k;
    const V diff = gk + (-h) * g;
    err = norm(diff);
  };
  std::vector<Piece> stack;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) stack.push_back({cuts[i], cuts[i + 1]});
  if (stack.empty()) return zero;
  const double span_total = cuts.back() - cuts.front();
  V total = zero;
  std::size_t used = 0;
  while (!stack.empty()) {
    const Piece p = stack.back();
    stack.pop_back();
    V est = zero;
    double err = 0.0;
    rule(p.a, p.b, est, err);
    ++used;
    const double budget = tol * (p.b - p.a) / span_total;
    if (err <= budget || used >= max_intervals || (p.b - p.a) < 1e-14 * span_total) {
      total = total + est;
    } else {
      const double m = 0.5 * (p.a + p.b);
      stack.push_back({m, p.b});
      stack.push_back({p.a, m});
    }
  }
  return total;
}

}  // namespace optlaws::quadrature
