#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planecast/geometry.hpp"

using namespace planecast;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

void check_vec(const Vec3& got, const Vec3& want, double tol = 1e-12) {
  CHECK(std::abs(got.x - want.x) <= tol);
  CHECK(std::abs(got.y - want.y) <= tol);
  CHECK(std::abs(got.z - want.z) <= tol);
}

}  // namespace

TEST_CASE("basis at the reference pose") {
  const PlaneBasis b = device_to_plane_basis(Quat::identity());
  check_vec(b.e1, {1, 0, 0}, 0.0);
  check_vec(b.e2, {0, 0, -1}, 0.0);
}

TEST_CASE("basis matches the rotation-matrix oracle") {
  SUBCASE("90 degrees about X") {
    const auto m = oracle::rotation_matrix({1, 0, 0}, kPi / 2);
    const Vec3 e1 = oracle::apply(m, {1, 0, 0});
    const Vec3 e2 = oracle::apply(m, {0, 0, -1});
    check_vec(e1, {1, 0, 0});
    check_vec(e2, {0, 1, 0});
    const PlaneBasis b = device_to_plane_basis(Quat::from_axis_angle({1, 0, 0}, kPi / 2));
    check_vec(b.e1, e1);
    check_vec(b.e2, e2);
  }
  SUBCASE("90 degrees about Y") {
    const auto m = oracle::rotation_matrix({0, 1, 0}, kPi / 2);
    const Vec3 e1 = oracle::apply(m, {1, 0, 0});
    const Vec3 e2 = oracle::apply(m, {0, 0, -1});
    check_vec(e1, {0, 0, -1});
    check_vec(e2, {-1, 0, 0});
    const PlaneBasis b = device_to_plane_basis(Quat::from_axis_angle({0, 1, 0}, kPi / 2));
    check_vec(b.e1, e1);
    check_vec(b.e2, e2);
  }
  SUBCASE("random rotations") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
      const Vec3 axis{g(rng), g(rng), g(rng)};
      const double a = ang(rng);
      const auto m = oracle::rotation_matrix(axis, a);
      const PlaneBasis b = device_to_plane_basis(Quat::from_axis_angle(axis, a));
      check_vec(b.e1, oracle::apply(m, {1, 0, 0}), 1e-12);
      check_vec(b.e2, oracle::apply(m, {0, 0, -1}), 1e-12);
    }
  }
}

TEST_CASE("orientation input is validated") {
  CHECK_THROWS_AS(device_to_plane_basis({1.01, 0, 0, 0}), InvalidOrientation);
  CHECK_THROWS_AS(device_to_plane_basis({NAN, 0, 0, 0}), InvalidOrientation);
  CHECK_NOTHROW(device_to_plane_basis({1.0005, 0, 0, 0}));
  const auto s = make_state(TechniqueMode::PivotPC, 0.1);
  CHECK_THROWS_AS(apply_rotation(s, {0, 0, 0, 0}), InvalidOrientation);
  CHECK_THROWS(apply_touch(s, INFINITY, 0));
}

TEST_CASE("PivotPC rotation sweeps the cursor") {
  PlanecastState s = make_state(TechniqueMode::PivotPC, 0.1);
  s = apply_touch(s, 100, 0);
  check_vec(s.cursor, {10, 0, 0});
  const auto q = Quat::from_axis_angle({0, 1, 0}, kPi / 2);
  const auto r = apply_rotation(s, q);
  const Vec3 want = 10.0 * oracle::apply(oracle::rotation_matrix({0, 1, 0}, kPi / 2), {1, 0, 0});
  check_vec(want, {0, 0, -10}, 1e-12);
  check_vec(r.cursor, want, 1e-12);
  CHECK(r.uv == s.uv);
  check_vec(r.plane.pivot, {0, 0, 0}, 0.0);
}

TEST_CASE("zero lever arm keeps the cursor on the pivot") {
  std::mt19937_64 rng(5);
  const auto s = make_state(TechniqueMode::PivotPC, 0.1);
  for (int i = 0; i < 20; ++i) {
    const auto r = apply_rotation(s, oracle::random_unit_quat(rng));
    check_vec(r.cursor, {0, 0, 0}, 0.0);
  }
}

TEST_CASE("FreePC rotation leaves the cursor in place") {
  std::mt19937_64 rng(6);
  PlanecastState s = make_state(TechniqueMode::FreePC, 0.1);
  s.cursor = {5, 7, -3};
  s.plane.pivot = s.cursor;
  for (int i = 0; i < 20; ++i) {
    const auto r = apply_rotation(s, oracle::random_unit_quat(rng));
    check_vec(r.cursor, {5, 7, -3}, 0.0);
    check_vec(r.plane.pivot, r.cursor, 0.0);
  }
}

TEST_CASE("touch at the reference pose") {
  const auto s = make_state(TechniqueMode::PivotPC, 0.1);
  CHECK(apply_touch(s, 0, 0) == s);
  check_vec(apply_touch(s, 100, 0).cursor, {10, 0, 0}, 1e-12);
  // a swipe toward the user brings the cursor toward the viewer
  check_vec(apply_touch(s, 0, 100).cursor, {0, 0, 10}, 1e-12);
}

TEST_CASE("FreePC touch at the reference pose never changes Y") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-300, 300);
  auto s = make_state(TechniqueMode::FreePC, 0.1);
  for (int i = 0; i < 500; ++i) {
    s = apply_touch(s, d(rng), d(rng));
    CHECK(std::abs(s.cursor.y) <= 1e-9);
  }
}

TEST_CASE("rotation sensitivity") {
  auto s = make_state(TechniqueMode::PivotPC, 1.0);
  CHECK(rotation_sensitivity(s) == 0.0);
  s = apply_touch(s, 3, -4);
  CHECK(rotation_sensitivity(s) == Approx(5.0).epsilon(1e-15));
  auto f = make_state(TechniqueMode::FreePC, 1.0);
  f = apply_touch(f, 3, -4);
  CHECK(rotation_sensitivity(f) == 0.0);
}

TEST_CASE("lever arm: 90 degree turn moves the cursor 10*sqrt(2)") {
  auto s = apply_touch(make_state(TechniqueMode::PivotPC, 0.1), 100, 0);
  const auto r = apply_rotation(s, Quat::from_axis_angle({0, 1, 0}, kPi / 2));
  const double moved = distance(s.cursor, r.cursor);
  CHECK(moved == Approx(2.0 * 10.0 * std::sin(kPi / 4)).epsilon(1e-12));
  CHECK(moved == Approx(10.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("technique names") {
  CHECK(to_string(TechniqueMode::PivotPC) == "pivot");
  CHECK(to_string(TechniqueMode::FreePC) == "free");
  CHECK(technique_from_string("free") == TechniqueMode::FreePC);
  CHECK_THROWS(technique_from_string("warp"));
  CHECK(default_gain(400) == Approx(0.1));
}
