#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "planecast/sim.hpp"
#include "planecast/task.hpp"

using namespace planecast;
using namespace planecast::sim;

namespace {

// Finger travel straight from the emitted touch records.
double summed_moves(const Trace& t) {
  double total = 0, x = 0, y = 0;
  for (const auto& m : t.messages) {
    if (const auto* touch = std::get_if<wire::Touch>(&m)) {
      if (touch->phase == wire::TouchPhase::Move) total += std::hypot(touch->x_px - x, touch->y_px - y);
      x = touch->x_px;
      y = touch->y_px;
    }
  }
  return total;
}

std::size_t count_orientations_before_touch(const Trace& t) {
  std::size_t n = 0;
  for (const auto& m : t.messages) {
    if (std::holds_alternative<wire::Touch>(m)) break;
    ++n;
  }
  return n;
}

// Plays a trace through a one-trial session and presses the footswitch.
std::optional<TrialRecord> play(const TrialSpec& spec, const Trace& trace, double gain) {
  SessionConfig cfg;
  cfg.gain = gain;
  Session s(cfg, {spec});
  s.ingest(1, wire::Hello{"sim", 480, 800}, 0);
  for (int i = 0; i < 30; ++i) s.ingest(1, wire::Orientation{i, Quat::identity()}, i);
  REQUIRE(s.machine().phase() == TrialPhase::Ready);
  for (const auto& m : trace.messages) s.ingest(1, m, wire::timestamp_of(m));
  const auto r = s.ingest(1, wire::Footswitch{trace.end_ms + 1}, trace.end_ms + 1);
  if (r.records.empty()) return std::nullopt;
  return r.records.front();
}

TraceContext context(double gain) {
  TraceContext ctx;
  ctx.t0_ms = 100;
  ctx.gain = gain;
  return ctx;
}

}  // namespace

TEST_CASE("a target along e1 needs no rotation") {
  const Trace t = plan_pivot_trajectory({52, 0, 0}, {}, context(0.1));
  CHECK(t.goal == Quat::identity());
  CHECK(count_orientations_before_touch(t) == 1);  // the sample sharing the first touch tick
  CHECK(t.swipe_px == doctest::Approx(520.0).epsilon(1e-12));
  CHECK(distance(t.predicted_cursor, {52, 0, 0}) <= 1e-9);
}

TEST_CASE("an upper target needs a 90 degree roll") {
  const Trace t = plan_pivot_trajectory({0, 52, 0}, {}, context(0.1));
  CHECK(angular_distance_deg(Quat::identity(), t.goal) == doctest::Approx(90.0).epsilon(1e-12));
  const PlaneBasis b = device_to_plane_basis(t.goal);
  CHECK(distance(b.e1, {0, 1, 0}) <= 1e-12);
  // 90 deg at 1.8 deg per tick, then the settle hold
  CHECK(count_orientations_before_touch(t) == 50 + 30 + 1);
}

TEST_CASE("a target into the screen needs reorientation under e1 alignment") {
  const Trace t = plan_free_trajectory({0, 0, -52}, {}, context(0.1));
  CHECK(angular_distance_deg(Quat::identity(), t.goal) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(distance(device_to_plane_basis(t.goal).e1, {0, 0, -1}) <= 1e-12);
}

TEST_CASE("a target behind e1 turns about the plane normal") {
  const Trace t = plan_pivot_trajectory({-52, 0, 0}, {}, context(0.1));
  const PlaneBasis b = device_to_plane_basis(t.goal);
  CHECK(distance(b.e1, {-1, 0, 0}) <= 1e-12);
  CHECK(std::abs(b.e2.y) <= 1e-12);  // the plane stays horizontal
}

TEST_CASE("every target is reached under both techniques") {
  for (auto technique : {TechniqueMode::PivotPC, TechniqueMode::FreePC}) {
    for (int idx = 1; idx <= 12; ++idx) {
      for (double r : kTargetRadiiCm) {
        CAPTURE(idx);
        CAPTURE(r);
        const double gain = 40.0 / 480.0;
        const Vec3 target = target_position(idx, r);
        const Trace t = technique == TechniqueMode::PivotPC
                            ? plan_pivot_trajectory(target, {}, context(gain))
                            : plan_free_trajectory(target, {}, context(gain));
        CHECK(distance(t.predicted_cursor, target) <= 1.0);
        const auto rec = play({idx, r, technique, Condition::Speed}, t, gain);
        REQUIRE(rec);
        CHECK(rec->d_cm <= 2.0);
        CHECK(rec->t_px == doctest::Approx(summed_moves(t)).epsilon(1e-12));
        CHECK(rec->t_px == doctest::Approx(r / gain).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("traces are deterministic") {
  const Vec3 target = target_position(6, 96);
  const Trace a = plan_free_trajectory(target, {}, context(0.1));
  const Trace b = plan_free_trajectory(target, {}, context(0.1));
  REQUIRE(a.messages.size() == b.messages.size());
  for (std::size_t i = 0; i < a.messages.size(); ++i) {
    CHECK(wire::encode(a.messages[i]) == wire::encode(b.messages[i]));
  }
}

TEST_CASE("invalid planner input") {
  ControllerConfig bad;
  bad.sample_rate_hz = 0;
  CHECK_THROWS(plan_pivot_trajectory({1, 0, 0}, bad, context(0.1)));
  CHECK_THROWS(plan_pivot_trajectory({0, 0, 0}, {}, context(0.1)));
}

TEST_CASE("headless runs over a short plan") {
  const auto full = make_session_plan(5, TechniqueOrder::FreeFirst);
  const std::vector<TrialSpec> plan(full.begin(), full.begin() + 6);
  HeadlessOptions opts;
  std::ostringstream log;
  opts.log = &log;
  const HeadlessRun run = run_headless(plan, opts);
  REQUIRE(run.records.size() == plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(run.records[i].spec == plan[i]);
    CHECK(run.records[i].d_cm <= 2.0);
    CHECK(run.records[i].mt_ms > 0.0);
  }
  std::istringstream in(log.str());
  CHECK(replay_log(in).records == run.records);
}

TEST_CASE("a trial that cannot finish in its budget is a harness failure") {
  const auto plan = make_session_plan(1, TechniqueOrder::PivotFirst);
  HeadlessOptions opts;
  opts.trial_budget_ms = 100;
  CHECK_THROWS_AS(run_headless({plan.front()}, opts), HarnessFailure);
}
