#include "planecast/math.hpp"

#include <algorithm>

namespace planecast {

Quat Quat::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = norm(axis);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("from_axis_angle: axis must be nonzero and finite");
  }
  const double s = std::sin(angle_rad / 2.0) / n;
  return {std::cos(angle_rad / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

Quat normalized(const Quat& q) {
  const double n = norm(q);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite quaternion");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quat slerp(const Quat& a, const Quat& b_in, double t) {
  Quat b = b_in;
  double c = dot(a, b);
  if (c < 0.0) {
    b = negate(b);
    c = -c;
  }
  c = std::min(c, 1.0);
  // Nearly parallel: the lerp is accurate and avoids dividing by sin(theta) ~ 0.
  if (c > 1.0 - 1e-12) {
    return normalized({a.w + t * (b.w - a.w), a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
                       a.z + t * (b.z - a.z)});
  }
  const double theta = std::acos(c);
  const double s = std::sin(theta);
  const double wa = std::sin((1.0 - t) * theta) / s;
  const double wb = std::sin(t * theta) / s;
  return normalized({wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y,
                     wa * a.z + wb * b.z});
}

Quat rotation_between(const Vec3& from, const Vec3& to, const Vec3& fallback_axis) {
  const double c = dot(from, to);
  if (c < -1.0 + 1e-12) {
    return Quat::from_axis_angle(fallback_axis, std::numbers::pi);
  }
  // Half-angle construction: q = (1 + c, from x to), normalized.
  const Vec3 axis = cross(from, to);
  return normalized({1.0 + c, axis.x, axis.y, axis.z});
}

}  // namespace planecast
