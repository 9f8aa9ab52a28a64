#include "planecast/orientation_filter.hpp"

#include <stdexcept>

namespace planecast {

OrientationFilter::OrientationFilter(std::size_t window) : window_(window) {
  if (window_ == 0) throw std::invalid_argument("filter window must be at least 1");
}

FilterOutput OrientationFilter::push(const OrientationSample& sample) {
  const Quat raw = normalized(sample.q);
  Quat q = raw;
  if (!buffer_.empty() && dot(buffer_.front(), q) < 0.0) q = negate(q);
  buffer_.push_back(q);

  if (buffer_.size() > window_) {
    buffer_.pop_front();
    // Keep every entry on the new head's hemisphere.
    for (auto it = buffer_.begin() + 1; it != buffer_.end(); ++it) {
      if (dot(buffer_.front(), *it) < 0.0) *it = negate(*it);
    }
  }

  Quat sum{0.0, 0.0, 0.0, 0.0};
  for (const Quat& b : buffer_) {
    sum.w += b.w;
    sum.x += b.x;
    sum.y += b.y;
    sum.z += b.z;
  }
  const double n = norm(sum);
  if (!(n > 1e-12)) {
    ++degenerate_count_;
    return {raw, true};
  }
  return {{sum.w / n, sum.x / n, sum.y / n, sum.z / n}, false};
}

Quat OrientationFilter::relative(const Quat& q) const { return conjugate(reference_) * q; }

double angular_distance_deg(const Quat& a, const Quat& b) {
  // Same as 2*acos(|a.b|) for unit inputs, but accurate near 0 degrees and
  // exactly zero for q vs q and q vs -q.
  const Quat c = dot(a, b) < 0.0 ? negate(b) : b;
  const double diff = norm(Quat{a.w - c.w, a.x - c.x, a.y - c.y, a.z - c.z});
  const double sum = norm(Quat{a.w + c.w, a.x + c.x, a.y + c.y, a.z + c.z});
  return 4.0 * std::atan2(diff, sum) * kRadToDeg;
}

bool mt_threshold_crossed(const Quat& start, const Quat& now, double threshold_deg) {
  return angular_distance_deg(start, now) >= threshold_deg;
}

}  // namespace planecast
