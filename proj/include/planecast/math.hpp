#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace planecast {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// World-space vector in cm. X right, Y up, Z toward the viewer.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
  constexpr bool operator==(const Vec3&) const = default;

  static constexpr Vec3 unit_x() { return {1.0, 0.0, 0.0}; }
  static constexpr Vec3 unit_y() { return {0.0, 1.0, 0.0}; }
  static constexpr Vec3 unit_z() { return {0.0, 0.0, 1.0}; }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Rotation quaternion, Hamilton convention, w first.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr bool operator==(const Quat&) const = default;

  static constexpr Quat identity() { return {}; }

  /// Rotation of `angle_rad` about `axis` (need not be unit length, must be nonzero).
  static Quat from_axis_angle(const Vec3& axis, double angle_rad);
};

constexpr double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Quat& q) { return std::sqrt(dot(q, q)); }

constexpr Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

constexpr Quat conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

constexpr Quat negate(const Quat& q) { return {-q.w, -q.x, -q.y, -q.z}; }

inline bool is_finite(const Quat& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

/// Throws std::invalid_argument on a zero or non-finite quaternion.
Quat normalized(const Quat& q);

/// Rotates v by unit quaternion q (q v q*), expanded to avoid building the sandwich product.
constexpr Vec3 rotate(const Quat& q, const Vec3& v) {
  const Vec3 u{q.x, q.y, q.z};
  const Vec3 t = 2.0 * cross(u, v);
  return v + q.w * t + cross(u, t);
}

/// Shortest-arc spherical interpolation between unit quaternions.
Quat slerp(const Quat& a, const Quat& b, double t);

/// Shortest-arc rotation taking unit vector `from` onto unit vector `to`. For
/// antiparallel inputs the rotation is a half-turn about `fallback_axis`
/// (which must be perpendicular to `from`).
Quat rotation_between(const Vec3& from, const Vec3& to, const Vec3& fallback_axis);

}  // namespace planecast
