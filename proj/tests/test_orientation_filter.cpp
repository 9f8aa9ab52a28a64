#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planecast/orientation_filter.hpp"

using namespace planecast;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Quat about_x_deg(double deg) { return Quat::from_axis_angle({1, 0, 0}, deg * kDegToRad); }

// Same rotation, either sign.
double rotation_gap(const Quat& a, const Quat& b) {
  return std::min(norm(Quat{a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}),
                  norm(Quat{a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}));
}

}  // namespace

TEST_CASE("constant input is a fixed point") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Quat q0 = oracle::random_unit_quat(rng);
    OrientationFilter f;
    for (int i = 0; i < 100; ++i) {
      const auto out = f.push({i * 20, q0});
      CHECK_FALSE(out.degenerate);
      CHECK(rotation_gap(out.q, q0) <= 1e-15);
    }
  }
}

TEST_CASE("step response settles on the 30th post-step sample") {
  const Quat target = about_x_deg(20);
  OrientationFilter f;
  for (int i = 0; i < 30; ++i) f.push({i, Quat::identity()});
  for (int k = 1; k <= 40; ++k) {
    const auto out = f.push({30 + k, target});
    const double gap = rotation_gap(out.q, target);
    if (k < 30) {
      CHECK(gap > 1e-6);
    } else {
      CHECK(gap <= 1e-15);
    }
  }
}

TEST_CASE("warm-up averages whatever is buffered") {
  OrientationFilter f;
  CHECK(rotation_gap(f.push({0, Quat::identity()}).q, Quat::identity()) == 0.0);
  const auto out = f.push({1, about_x_deg(20)});
  CHECK(f.size() == 2);
  CHECK(rotation_gap(out.q, oracle::geodesic_midpoint(Quat::identity(), about_x_deg(20))) <= 1e-12);
}

TEST_CASE("two equal clusters average to the geodesic midpoint") {
  OrientationFilter f;
  FilterOutput out;
  for (int i = 0; i < 15; ++i) out = f.push({i, Quat::identity()});
  for (int i = 15; i < 30; ++i) out = f.push({i, about_x_deg(20)});
  const Quat mid = oracle::geodesic_midpoint(Quat::identity(), about_x_deg(20));
  CHECK(rotation_gap(out.q, mid) <= 1e-6);
  const auto aa = oracle::axis_angle_of(out.q);
  CHECK(aa.angle * kRadToDeg == Approx(10.0).epsilon(1e-9));
  CHECK(aa.axis.x == Approx(1.0));

  SUBCASE("arbitrary cluster pairs") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
      const Quat a = oracle::random_unit_quat(rng);
      const Quat b = slerp(a, oracle::random_unit_quat(rng), 0.3);
      OrientationFilter g;
      FilterOutput o;
      for (int i = 0; i < 15; ++i) o = g.push({i, a});
      for (int i = 0; i < 15; ++i) o = g.push({15 + i, b});
      CHECK(rotation_gap(o.q, oracle::geodesic_midpoint(a, b)) <= 1e-6);
    }
  }
}

TEST_CASE("hemisphere alignment") {
  const Quat q = about_x_deg(40);
  OrientationFilter f;
  f.push({0, q});
  const auto out = f.push({1, negate(q)});
  CHECK(rotation_gap(out.q, q) <= 1e-15);
  for (const Quat& b : f.buffer()) CHECK(dot(b, f.buffer().front()) >= 0.0);

  SUBCASE("buffer stays aligned to its head after eviction") {
    std::mt19937_64 rng(3);
    OrientationFilter g(5);
    Quat prev = Quat::identity();
    for (int i = 0; i < 500; ++i) {
      Quat next = slerp(prev, oracle::random_unit_quat(rng), 0.4);
      if (i % 3 == 0) next = negate(next);
      const auto o = g.push({i, next});
      CHECK_FALSE(o.degenerate);
      CHECK(g.size() <= 5);
      for (const Quat& b : g.buffer()) CHECK(dot(b, g.buffer().front()) >= 0.0);
      prev = next;
    }
    CHECK(g.degenerate_count() == 0);
  }
}

TEST_CASE("shift invariance and determinism") {
  std::mt19937_64 rng(4);
  std::vector<Quat> seq;
  for (int i = 0; i < 120; ++i) seq.push_back(oracle::random_unit_quat(rng));
  OrientationFilter a, b;
  for (int i = 0; i < 120; ++i) {
    const auto oa = a.push({i, seq[i]});
    const auto ob = b.push({1000000 + i * 7, seq[i]});
    CHECK(oa.q == ob.q);
  }
}

TEST_CASE("window must be positive and non-unit input is renormalized") {
  CHECK_THROWS(OrientationFilter(0));
  OrientationFilter f(3);
  const auto out = f.push({0, {2, 0, 0, 0}});
  CHECK(out.q == Quat::identity());
  CHECK_THROWS(f.push({1, {0, 0, 0, 0}}));
}

TEST_CASE("calibration") {
  std::mt19937_64 rng(5);
  const Quat q0 = oracle::random_unit_quat(rng);
  const Quat r = oracle::random_unit_quat(rng);
  OrientationFilter f;
  f.calibrate(q0);
  CHECK(rotation_gap(f.relative(q0), Quat::identity()) <= 1e-15);
  CHECK(rotation_gap(f.relative(q0 * r), r) <= 1e-15);
  f.calibrate(r);
  CHECK(f.reference() == r);
}

TEST_CASE("angular distance") {
  std::mt19937_64 rng(6);
  const Quat q = oracle::random_unit_quat(rng);
  CHECK(angular_distance_deg(q, q) == 0.0);
  CHECK(angular_distance_deg(q, negate(q)) == 0.0);
  CHECK(angular_distance_deg(Quat::identity(), Quat::from_axis_angle({0, 1, 0}, kPi / 2)) ==
        Approx(90.0).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    const Quat a = oracle::random_unit_quat(rng);
    const Quat b = oracle::random_unit_quat(rng);
    const double by_acos = 2.0 * std::acos(std::min(1.0, std::abs(dot(a, b)))) * kRadToDeg;
    const double by_axis = oracle::axis_angle_of(conjugate(a) * b).angle * kRadToDeg;
    const double d = angular_distance_deg(a, b);
    CHECK(d == Approx(by_acos).epsilon(1e-9));
    CHECK(d == Approx(by_axis).epsilon(1e-9));
    CHECK(d >= 0.0);
    CHECK(d <= 180.0);
  }
}

TEST_CASE("MT threshold straddles 3.6 degrees") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Quat start = oracle::random_unit_quat(rng);
    const Vec3 axis{g(rng), g(rng), g(rng)};
    CHECK_FALSE(mt_threshold_crossed(start, start));
    CHECK_FALSE(mt_threshold_crossed(start, start * Quat::from_axis_angle(axis, 3.5 * kDegToRad)));
    CHECK(mt_threshold_crossed(start, start * Quat::from_axis_angle(axis, 3.7 * kDegToRad)));
    CHECK(mt_threshold_crossed(start, start * Quat::from_axis_angle(axis, kPi / 2)));
  }
}
