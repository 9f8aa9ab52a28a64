#pragma once

// Scripted synthetic user. Generates orientation/touch/footswitch traces that
// solve docking trials under either technique, and drives complete headless
// sessions through the same Session the network host uses.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "planecast/session.hpp"
#include "planecast/wire.hpp"

namespace planecast::sim {

struct ControllerConfig {
  double sample_rate_hz = 50.0;
  double rotation_speed_deg_s = 90.0;
  double swipe_speed_px_s = 800.0;
  /// Largest allowed predicted miss of the target center.
  double stop_distance_cm = 1.0;

  void validate() const;
};

/// Where a trace starts.
struct TraceContext {
  std::int64_t t0_ms = 0;
  /// Device orientation (world axes, relative to the reference pose) at t0.
  Quat start = Quat::identity();
  double gain = 0.1;
  int screen_w_px = 480;
  int screen_h_px = 800;
  /// Samples held after a rotation so the moving average settles.
  std::size_t settle_samples = 30;
};

struct Trace {
  std::vector<wire::Message> messages;
  std::int64_t end_ms = 0;
  Quat end_orientation;
  /// Orientation the device is rotated to; its e1 points at the target.
  Quat goal;
  /// Total finger travel of the swipe strokes.
  double swipe_px = 0.0;
  /// Cursor position the trace leads to, computed with the pure kinematics.
  Vec3 predicted_cursor;
};

/// Raised when the planner cannot get within stop_distance of the target, or a
/// headless trial does not complete within its simulated time budget.
class HarnessFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotate so e1 points along the target, hold, then swipe |target| / gain px along +du.
Trace plan_pivot_trajectory(const Vec3& target, const ControllerConfig& cfg,
                            const TraceContext& ctx);

/// Same motion under FreePC: the reorientation (supination/pronation) leaves the
/// cursor in place, then the swipe carries it to the target.
Trace plan_free_trajectory(const Vec3& target, const ControllerConfig& cfg,
                           const TraceContext& ctx);

struct HeadlessOptions {
  SessionConfig session;
  ControllerConfig controller;
  int screen_w_px = 480;
  int screen_h_px = 800;
  std::string device_id = "synthetic-user";
  /// Per-trial simulated budget from the start of the reset to the footswitch.
  std::int64_t trial_budget_ms = 60000;
  /// Optional session event log (replayable trace).
  std::ostream* log = nullptr;
};

struct HeadlessRun {
  std::vector<TrialRecord> records;
  std::size_t messages = 0;
  std::int64_t simulated_ms = 0;
};

/// Plays every trial of `plan`: return the device flat, wait for Ready, play the
/// planned trace, press the footswitch once matched. Throws HarnessFailure if any
/// trial cannot be completed.
HeadlessRun run_headless(const std::vector<TrialSpec>& plan, const HeadlessOptions& opts);

}  // namespace planecast::sim
