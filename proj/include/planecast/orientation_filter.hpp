#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>

#include "planecast/math.hpp"

namespace planecast {

struct FilterConfig {
  std::size_t window = 30;
  double mt_threshold_deg = 3.6;     // 2% of the 180 degree maximum
  double reset_tolerance_deg = 5.0;  // "device flat again" gate between trials
};

struct OrientationSample {
  std::int64_t t_ms = 0;
  Quat q;
};

struct FilterOutput {
  Quat q;
  /// Set when the window mean had zero norm; q is then the latest raw sample.
  bool degenerate = false;
};

/// Sliding-window moving average over hemisphere-aligned quaternions.
///
/// Samples are sign-flipped onto the hemisphere of the oldest buffered sample,
/// averaged component-wise and renormalized. A partial window (warm-up)
/// averages whatever is present.
class OrientationFilter {
 public:
  explicit OrientationFilter(std::size_t window = 30);

  FilterOutput push(const OrientationSample& sample);

  void calibrate(const Quat& reference) { reference_ = reference; }
  const Quat& reference() const { return reference_; }
  /// Orientation relative to the calibrated reference: reference^-1 * q.
  Quat relative(const Quat& q) const;

  std::size_t window() const { return window_; }
  std::size_t size() const { return buffer_.size(); }
  const std::deque<Quat>& buffer() const { return buffer_; }
  std::uint64_t degenerate_count() const { return degenerate_count_; }
  void clear() { buffer_.clear(); }

 private:
  std::size_t window_;
  std::deque<Quat> buffer_;
  Quat reference_ = Quat::identity();
  std::uint64_t degenerate_count_ = 0;
};

/// Rotation angle between two orientations in degrees, in [0, 180]; q and -q coincide.
double angular_distance_deg(const Quat& a, const Quat& b);

bool mt_threshold_crossed(const Quat& start, const Quat& now, double threshold_deg = 3.6);

}  // namespace planecast
