#include <numbers>
#include <sstream>

#include "doctest.h"
#include "planecast/session.hpp"

using namespace planecast;
using namespace planecast::wire;

namespace {

SessionConfig fixed_gain(double gain) {
  SessionConfig cfg;
  cfg.gain = gain;
  return cfg;
}

std::vector<TrialSpec> one_trial(int idx = 9) {
  return {TrialSpec{idx, 52, TechniqueMode::PivotPC, Condition::Speed}};
}

const StateSnapshot& last_state(const IngestResult& r) {
  REQUIRE_FALSE(r.outbound.empty());
  REQUIRE(std::holds_alternative<StateSnapshot>(r.outbound.back()));
  return std::get<StateSnapshot>(r.outbound.back());
}

}  // namespace

TEST_CASE("hello then identity orientation yields the reference basis") {
  Session s(SessionConfig{});
  const auto hello = s.ingest(1, Hello{"p", 400, 800}, 0);
  CHECK(s.gain() == doctest::Approx(0.1));
  CHECK(last_state(hello).phase == "awaiting_reset");

  const auto r = s.ingest(1, Orientation{10, Quat::identity()}, 5);
  REQUIRE(r.outbound.size() == 2);
  CHECK(std::holds_alternative<TrialBegin>(r.outbound[0]));
  const auto& st = last_state(r);
  CHECK(st.e1 == Vec3{1, 0, 0});
  CHECK(st.e2 == Vec3{0, 0, -1});
  CHECK(st.cursor == Vec3{});
  CHECK(st.phase == "ready");
  CHECK(st.t == 5);
}

TEST_CASE("records before hello are a session error") {
  Session s(SessionConfig{});
  CHECK_THROWS_AS(s.ingest(1, Orientation{0, Quat::identity()}, 0), ProtocolError);
  const auto r = s.ingest_line(1, encode(Orientation{0, Quat::identity()}), 0);
  REQUIRE(r.error);
  CHECK(r.error->kind() == ErrorKind::Session);
  s.ingest(2, Hello{"p", 480, 800}, 0);
  // hello on one connection does not authorize another
  CHECK(s.ingest_line(1, encode(Footswitch{1}), 0).error);
  CHECK_FALSE(s.ingest_line(2, encode(Footswitch{1}), 0).error);
}

TEST_CASE("touch deltas come from consecutive positions") {
  Session s(fixed_gain(0.1), one_trial(9));
  s.ingest(1, Hello{"p", 480, 800}, 0);
  s.ingest(1, Orientation{0, Quat::identity()}, 0);
  s.ingest(1, Touch{1, TouchPhase::Down, 100, 100}, 1);
  const auto r = s.ingest(1, Touch{2, TouchPhase::Move, 200, 100}, 2);
  CHECK(last_state(r).cursor.x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.machine().touch_travel_px() == 100.0);
  CHECK(s.machine().phase() == TrialPhase::Moving);

  s.ingest(1, Touch{3, TouchPhase::Up, 200, 100}, 3);
  const auto stray = s.ingest(1, Touch{4, TouchPhase::Move, 300, 100}, 4);
  CHECK_FALSE(stray.notes.empty());
  CHECK(s.machine().touch_travel_px() == 100.0);
}

TEST_CASE("bad lines are reported and the session carries on") {
  Session s(fixed_gain(0.125), one_trial(9));
  s.ingest(1, Hello{"p", 480, 800}, 0);
  s.ingest(1, Orientation{0, Quat::identity()}, 0);
  for (const char* bad : {"nonsense", "{\"type\":\"warp\",\"t\":1}", "{\"type\":\"touch\"}",
                          "{\"type\":\"orientation\",\"t\":1,\"q\":[3,0,0,0]}"}) {
    const auto r = s.ingest_line(1, bad, 1);
    CHECK(r.error);
    CHECK(r.outbound.empty());
  }
  s.ingest_line(1, encode(Touch{2, TouchPhase::Down, 0, 0}), 2);
  s.ingest_line(1, encode(Touch{3, TouchPhase::Move, 416, 0}), 3);
  const auto r = s.ingest_line(1, encode(Footswitch{4}), 10);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].d_cm == 0.0);
  CHECK(r.records[0].mt_ms == 8.0);
  CHECK(std::holds_alternative<TrialEnd>(r.outbound[0]));
  CHECK(std::get<StateSnapshot>(r.outbound.back()).phase == "ended");
}

TEST_CASE("calibration sets the flat pose") {
  SessionConfig cfg = fixed_gain(0.1);
  cfg.filter.window = 1;
  Session s(cfg, one_trial(9));
  s.ingest(1, Hello{"p", 480, 800}, 0);
  const Quat tilted = Quat::from_axis_angle({1, 0, 0}, 0.5);
  s.ingest(1, Orientation{0, tilted}, 0);
  CHECK(s.machine().phase() == TrialPhase::AwaitingReset);
  s.ingest(1, Calibrate{1}, 1);
  s.ingest(1, Orientation{2, tilted}, 2);
  CHECK(s.machine().phase() == TrialPhase::Ready);
  CHECK(angular_distance_deg(s.filter().reference(), tilted) <= 1e-9);
}

TEST_CASE("phone frame maps the device's flat pose onto the world") {
  SessionConfig cfg = fixed_gain(0.1);
  cfg.filter.window = 1;
  cfg.device_frame = DeviceFrame::Phone;
  Session s(cfg, one_trial(9));
  s.ingest(1, Hello{"p", 480, 800}, 0);
  // turning the phone about its own z (out of the screen) spins the plane about world Y
  const auto r =
      s.ingest(1, Orientation{0, Quat::from_axis_angle({0, 0, 1}, std::numbers::pi / 2)}, 0);
  const auto& st = last_state(r);
  CHECK(st.e1.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.e1.z == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(device_frame_from_string("phone") == DeviceFrame::Phone);
}

TEST_CASE("the event log replays to the same records") {
  std::stringstream log;
  std::vector<TrialRecord> live;
  {
    Session s(fixed_gain(0.125), one_trial(9));
    s.attach_log(&log);
    s.ingest_line(1, encode(Hello{"p", 480, 800}), 0);
    s.ingest_line(1, "garbage", 1);
    s.ingest_line(1, encode(Orientation{0, Quat::identity()}), 2);
    s.ingest_line(1, encode(Touch{2, TouchPhase::Down, 0, 0}), 3);
    s.ingest_line(1, encode(Touch{3, TouchPhase::Move, 416.5, 0}), 4);
    s.ingest_line(1, encode(Footswitch{4}), 50);
    live = s.records();
  }
  REQUIRE(live.size() == 1);
  const std::string text = log.str();
  CHECK(text.rfind("{\"log\":\"planecast-session\"", 0) == 0);
  std::istringstream in(text);
  const ReplayResult r = replay_log(in);
  CHECK(r.records == live);
  CHECK(r.errors == 1);
  CHECK(r.plan == one_trial(9));
  CHECK(r.config.gain == 0.125);

  std::istringstream broken("{\"log\":\"something-else\"}\n");
  CHECK_THROWS(replay_log(broken));
}
