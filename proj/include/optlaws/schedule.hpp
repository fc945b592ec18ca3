#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace optlaws {

/// Shape of one schedule piece.
enum class SegmentKind { linear, constant, cosine };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view name);

/// Integrand selector for Schedule::integral.
enum class Functional {
  eta,      // ∫ η(t) dt
  eta_sq,   // ∫ η(t)² dt
  deta_sq,  // ∫ η'(t)² dt
};

/// One piece of a learning-rate schedule on [t_start, t_end]. Times are in
/// billions of tokens, rates are normalized (raw LR / lr_scale).
///
/// A cosine piece follows the half-period curve
///   η(t) = eta_end + (eta_start - eta_end)/2 · (cos(π (t - t_start)/(t_end - t_start)) + 1).
struct Segment {
  SegmentKind kind = SegmentKind::linear;
  double t_start = 0.0;
  double t_end = 0.0;
  double eta_start = 0.0;
  double eta_end = 0.0;

  double length() const { return t_end - t_start; }
  double value(double t) const;
  double derivative(double t) const;
  /// Exact integral over [u, v] ⊆ [t_start, t_end].
  double integral(double u, double v, Functional functional) const;
  /// Largest η on [u, v] ⊆ [t_start, t_end]. Every piece kind is monotone.
  double max_on(double u, double v) const;

  /// Throws InvalidArgument when the piece violates its invariants.
  void validate() const;
};

/// Phase boundaries of the four-phase schedule: warmup ends at a1, decay ends
/// at a2, plateau ends at a3, cooldown runs to the horizon.
struct Markers {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

enum class CooldownShape { linear, cosine };

/// Immutable piecewise learning-rate function on [0, S].
class Schedule {
 public:
  /// Validates contiguity (first t_start = 0, each t_end equals the next
  /// t_start), continuity at joints, and marker ordering 0 ≤ a1 ≤ a2 ≤ a3 ≤ S.
  Schedule(std::vector<Segment> segments, Markers markers);

  /// Four-phase schedule: linear 0→eta1 on [0,a1], linear eta1→eta2 on
  /// [a1,a2], constant eta2 on [a2,a3], then eta2→0 on [a3,S]. Zero-length
  /// phases are dropped.
  static Schedule general(double eta1, double eta2, Markers markers, double horizon,
                          CooldownShape cooldown = CooldownShape::linear);

  /// Linear warmup to `peak` over [0, warmup], then cooldown to zero.
  static Schedule warmup_cooldown(double peak, double warmup, double horizon,
                                  CooldownShape cooldown = CooldownShape::linear);

  /// Linear warmup, constant `peak` until `cooldown_start`, then linear decay.
  static Schedule warmup_constant_cooldown(double peak, double warmup, double cooldown_start,
                                           double horizon);

  /// Single constant piece at `rate` on [0, horizon]; markers all at 0.
  static Schedule constant(double rate, double horizon);

  double horizon() const { return segments_.back().t_end; }
  const Markers& markers() const { return markers_; }
  std::span<const Segment> segments() const { return segments_; }

  double eval(double t) const;
  /// Right-hand derivative; at the horizon the left-hand limit.
  double eval_derivative(double t) const;
  double integral(double u, double v, Functional functional) const;

  /// Supremum of η over [0, S].
  double peak() const;
  /// Supremum of η over [u, v].
  double peak_on(double u, double v) const;

  /// Segment joints strictly inside (0, S).
  std::vector<double> joints() const;

  /// Same shape with every rate multiplied by k > 0.
  Schedule scaled(double k) const;

 private:
  std::size_t locate(double t) const;
  void check_time(double t, const char* what) const;

  std::vector<Segment> segments_;
  Markers markers_;
};

}  // namespace optlaws
