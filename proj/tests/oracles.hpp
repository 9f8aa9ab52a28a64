#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the quaternion, filter or ANOVA code under test.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "planecast/math.hpp"

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rodrigues rotation matrix for a rotation of `angle` radians about `axis`.
inline Mat3 rotation_matrix(planecast::Vec3 axis, double angle) {
  const double n = std::sqrt(axis.x * axis.x + axis.y * axis.y + axis.z * axis.z);
  const double x = axis.x / n, y = axis.y / n, z = axis.z / n;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
           {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
           {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

inline planecast::Vec3 apply(const Mat3& m, planecast::Vec3 v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

/// Axis-angle of a unit quaternion's rotation, angle in [0, pi].
struct AxisAngle {
  planecast::Vec3 axis;
  double angle;
};

inline AxisAngle axis_angle_of(planecast::Quat q) {
  if (q.w < 0) q = {-q.w, -q.x, -q.y, -q.z};
  const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  if (s < 1e-300) return {{1, 0, 0}, 0.0};
  return {{q.x / s, q.y / s, q.z / s}, 2.0 * std::atan2(s, q.w)};
}

/// Rotation halfway from a to b along the geodesic, built from the axis-angle
/// of the relative rotation (no slerp or component averaging involved).
inline planecast::Quat geodesic_midpoint(const planecast::Quat& a, const planecast::Quat& b) {
  const planecast::Quat rel = planecast::conjugate(a) * b;
  const AxisAngle aa = axis_angle_of(rel);
  const double h = aa.angle / 4.0;
  const planecast::Quat half{std::cos(h), aa.axis.x * std::sin(h), aa.axis.y * std::sin(h),
                             aa.axis.z * std::sin(h)};
  return a * half;
}

/// Sums-of-squares decomposition SS_error = SS_total - SS_subjects - SS_treatment.
struct BruteAnova {
  double f;
  int df1;
  int df2;
};

inline BruteAnova brute_force_rm_anova(const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size(), k = x[0].size();
  long double grand = 0;
  for (const auto& row : x)
    for (double v : row) grand += v;
  grand /= static_cast<long double>(n * k);

  long double ss_total = 0, ss_subjects = 0, ss_treat = 0;
  for (const auto& row : x)
    for (double v : row) ss_total += (v - grand) * (v - grand);
  for (std::size_t i = 0; i < n; ++i) {
    long double m = 0;
    for (std::size_t j = 0; j < k; ++j) m += x[i][j];
    m /= k;
    ss_subjects += k * (m - grand) * (m - grand);
  }
  for (std::size_t j = 0; j < k; ++j) {
    long double m = 0;
    for (std::size_t i = 0; i < n; ++i) m += x[i][j];
    m /= n;
    ss_treat += n * (m - grand) * (m - grand);
  }
  const long double ss_error = ss_total - ss_subjects - ss_treat;
  const int df1 = static_cast<int>(k - 1);
  const int df2 = static_cast<int>((k - 1) * (n - 1));
  return {static_cast<double>((ss_treat / df1) / (ss_error / df2)), df1, df2};
}

/// Paired t statistic for columns 0 and 1.
inline double paired_t(const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  double mean = 0;
  for (const auto& row : x) mean += row[0] - row[1];
  mean /= n;
  double var = 0;
  for (const auto& row : x) {
    const double d = row[0] - row[1] - mean;
    var += d * d;
  }
  var /= (n - 1);
  return mean / std::sqrt(var / n);
}

inline std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng, std::size_t n,
                                                      std::size_t k) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> m(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const double subject = 5.0 * noise(rng);
    for (std::size_t j = 0; j < k; ++j) m[i][j] = 8000.0 + subject + 0.5 * j + noise(rng);
  }
  return m;
}

inline planecast::Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  planecast::Quat q{g(rng), g(rng), g(rng), g(rng)};
  return planecast::normalized(q);
}

}  // namespace oracle
