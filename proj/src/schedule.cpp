#include "optlaws/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "optlaws/error.hpp"

namespace optlaws {

namespace {

using std::numbers::pi;

// Antiderivatives of the cosine piece in the phase variable θ ∈ [0, π].
// With η = mid + amp·cos θ and dt = (L/π) dθ.
struct CosineForm {
  double mid;
  double amp;
  double scale;  // L / π

  double theta(const Segment& s, double t) const { return pi * (t - s.t_start) / s.length(); }

  double eta(double th) const { return scale * (mid * th + amp * std::sin(th)); }
  double eta_sq(double th) const {
    return scale * (mid * mid * th + 2.0 * mid * amp * std::sin(th) +
                    amp * amp * (0.5 * th + 0.25 * std::sin(2.0 * th)));
  }
  // η' = -amp·sin θ / scale, so ∫ η'² dt = (amp²/scale) ∫ sin² θ dθ.
  double deta_sq(double th) const {
    return amp * amp / scale * (0.5 * th - 0.25 * std::sin(2.0 * th));
  }
};

CosineForm cosine_form(const Segment& s) {
  const double amp = 0.5 * (s.eta_start - s.eta_end);
  return {s.eta_end + amp, amp, s.length() / pi};
}

}  // namespace

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::linear:
      return "linear";
    case SegmentKind::constant:
      return "constant";
    case SegmentKind::cosine:
      return "cosine";
  }
  return "linear";
}

SegmentKind segment_kind_from_string(std::string_view name) {
  if (name == "linear") return SegmentKind::linear;
  if (name == "constant") return SegmentKind::constant;
  if (name == "cosine") return SegmentKind::cosine;
  throw InvalidArgument("unknown segment kind '" + std::string(name) + "'");
}

double Segment::value(double t) const {
  switch (kind) {
    case SegmentKind::constant:
      return eta_start;
    case SegmentKind::linear: {
      if (t >= t_end) return eta_end;
      const double w = (t - t_start) / length();
      return eta_start + (eta_end - eta_start) * w;
    }
    case SegmentKind::cosine: {
      const double th = pi * (t - t_start) / length();
      return eta_end + 0.5 * (eta_start - eta_end) * (std::cos(th) + 1.0);
    }
  }
  return 0.0;
}

double Segment::derivative(double t) const {
  switch (kind) {
    case SegmentKind::constant:
      return 0.0;
    case SegmentKind::linear:
      return (eta_end - eta_start) / length();
    case SegmentKind::cosine: {
      const double th = pi * (t - t_start) / length();
      return -0.5 * (eta_start - eta_end) * pi / length() * std::sin(th);
    }
  }
  return 0.0;
}

double Segment::integral(double u, double v, Functional functional) const {
  if (v <= u) return 0.0;
  switch (kind) {
    case SegmentKind::constant:
    case SegmentKind::linear: {
      const double eu = value(u);
      const double ev = value(v);
      const double w = v - u;
      switch (functional) {
        case Functional::eta:
          return 0.5 * (eu + ev) * w;
        case Functional::eta_sq:
          return (eu * eu + eu * ev + ev * ev) * w / 3.0;
        case Functional::deta_sq: {
          const double m = derivative(u);
          return m * m * w;
        }
      }
      break;
    }
    case SegmentKind::cosine: {
      const CosineForm c = cosine_form(*this);
      const double tu = c.theta(*this, u);
      const double tv = c.theta(*this, v);
      switch (functional) {
        case Functional::eta:
          return c.eta(tv) - c.eta(tu);
        case Functional::eta_sq:
          return c.eta_sq(tv) - c.eta_sq(tu);
        case Functional::deta_sq:
          return c.deta_sq(tv) - c.deta_sq(tu);
      }
      break;
    }
  }
  return 0.0;
}

double Segment::max_on(double u, double v) const { return std::max(value(u), value(v)); }

void Segment::validate() const {
  std::ostringstream msg;
  if (!(std::isfinite(t_start) && std::isfinite(t_end) && std::isfinite(eta_start) &&
        std::isfinite(eta_end)))
    msg << "segment fields must be finite";
  else if (!(t_start < t_end))
    msg << "segment requires t_start < t_end (got " << t_start << ", " << t_end << ")";
  else if (eta_start < 0.0 || eta_end < 0.0)
    msg << "segment rates must be nonnegative";
  else if (kind == SegmentKind::constant && eta_start != eta_end)
    msg << "constant segment requires eta_start == eta_end";
  const std::string s = msg.str();
  if (!s.empty()) throw InvalidArgument(s);
}

Schedule::Schedule(std::vector<Segment> segments, Markers markers)
    : segments_(std::move(segments)), markers_(markers) {
  if (segments_.empty()) throw InvalidArgument("schedule needs at least one segment");
  for (const Segment& s : segments_) s.validate();
  if (segments_.front().t_start != 0.0)
    throw InvalidArgument("first segment must start at t = 0");
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const Segment& a = segments_[i];
    const Segment& b = segments_[i + 1];
    if (a.t_end != b.t_start) throw InvalidArgument("segments must be contiguous");
    if (a.eta_end != b.eta_start)
      throw InvalidArgument("schedule must be continuous at t = " + std::to_string(a.t_end));
  }
  const double S = horizon();
  const Markers& m = markers_;
  if (!(0.0 <= m.a1 && m.a1 <= m.a2 && m.a2 <= m.a3 && m.a3 <= S))
    throw InvalidArgument("markers must satisfy 0 <= a1 <= a2 <= a3 <= S");
}

Schedule Schedule::general(double eta1, double eta2, Markers markers, double horizon,
                           CooldownShape cooldown) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon S must be positive");
  if (eta1 < 0.0 || eta2 < 0.0) throw InvalidArgument("rates must be nonnegative");
  const auto& [a1, a2, a3] = markers;
  if (!(0.0 <= a1 && a1 <= a2 && a2 <= a3 && a3 <= horizon))
    throw InvalidArgument("markers must satisfy 0 <= a1 <= a2 <= a3 <= S");
  // Without a decay phase the warmup would end at eta1 and the plateau start
  // at eta2.
  if (a1 == a2 && eta1 != eta2)
    throw InvalidArgument("an empty decay phase (a1 == a2) requires eta1 == eta2");
  std::vector<Segment> segs;
  if (a1 > 0.0) segs.push_back({SegmentKind::linear, 0.0, a1, 0.0, eta1});
  if (a2 > a1) segs.push_back({SegmentKind::linear, a1, a2, eta1, eta2});
  if (a3 > a2) segs.push_back({SegmentKind::constant, a2, a3, eta2, eta2});
  if (horizon > a3) {
    const SegmentKind kind =
        cooldown == CooldownShape::cosine ? SegmentKind::cosine : SegmentKind::linear;
    segs.push_back({kind, a3, horizon, eta2, 0.0});
  }
  return Schedule(std::move(segs), markers);
}

Schedule Schedule::warmup_cooldown(double peak, double warmup, double horizon,
                                   CooldownShape cooldown) {
  return general(peak, peak, {warmup, warmup, warmup}, horizon, cooldown);
}

Schedule Schedule::warmup_constant_cooldown(double peak, double warmup, double cooldown_start,
                                            double horizon) {
  return general(peak, peak, {warmup, warmup, cooldown_start}, horizon);
}

Schedule Schedule::constant(double rate, double horizon) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon S must be positive");
  return Schedule({{SegmentKind::constant, 0.0, horizon, rate, rate}}, {0.0, 0.0, 0.0});
}

void Schedule::check_time(double t, const char* what) const {
  if (!(t >= 0.0 && t <= horizon())) {
    std::ostringstream msg;
    msg << what << ": t = " << t << " outside [0, " << horizon() << "]";
    throw InvalidArgument(msg.str());
  }
}

std::size_t Schedule::locate(double t) const {
  // First segment whose end is strictly beyond t; the horizon maps to the last.
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const Segment& s) { return x < s.t_end; });
  if (it == segments_.end()) return segments_.size() - 1;
  return static_cast<std::size_t>(it - segments_.begin());
}

double Schedule::eval(double t) const {
  check_time(t, "eval");
  return segments_[locate(t)].value(t);
}

double Schedule::eval_derivative(double t) const {
  check_time(t, "eval_derivative");
  return segments_[locate(t)].derivative(t);
}

double Schedule::integral(double u, double v, Functional functional) const {
  if (u > v) throw InvalidArgument("integral requires u <= v");
  check_time(u, "integral lower bound");
  check_time(v, "integral upper bound");
  if (u == v) return 0.0;
  double total = 0.0;
  for (std::size_t i = locate(u); i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.t_start >= v) break;
    total += s.integral(std::max(u, s.t_start), std::min(v, s.t_end), functional);
  }
  return total;
}

double Schedule::peak() const { return peak_on(0.0, horizon()); }

double Schedule::peak_on(double u, double v) const {
  if (u > v) throw InvalidArgument("peak_on requires u <= v");
  check_time(u, "peak_on lower bound");
  check_time(v, "peak_on upper bound");
  double best = eval(u);
  for (std::size_t i = locate(u); i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.t_start > v) break;
    best = std::max(best, s.max_on(std::max(u, s.t_start), std::min(v, s.t_end)));
  }
  return best;
}

std::vector<double> Schedule::joints() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) out.push_back(segments_[i].t_end);
  return out;
}

Schedule Schedule::scaled(double k) const {
  if (!(k > 0.0)) throw InvalidArgument("scale factor must be positive");
  std::vector<Segment> segs = segments_;
  for (Segment& s : segs) {
    s.eta_start *= k;
    s.eta_end *= k;
  }
  return Schedule(std::move(segs), markers_);
}

}  // namespace optlaws
