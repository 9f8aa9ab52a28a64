#include "planecast/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace planecast::sim {

void ControllerConfig::validate() const {
  if (!(sample_rate_hz > 0.0) || !(rotation_speed_deg_s > 0.0) || !(swipe_speed_px_s > 0.0) ||
      !(stop_distance_cm > 0.0)) {
    throw std::invalid_argument("controller config values must all be positive");
  }
}

namespace {

/// Emits timestamped samples on a fixed tick grid.
class TraceBuilder {
 public:
  TraceBuilder(const ControllerConfig& cfg, std::int64_t t0) : cfg_(cfg), t0_(t0) {}

  std::int64_t tick() {
    ++ticks_;
    return t0_ + static_cast<std::int64_t>(
                     std::llround(static_cast<double>(ticks_) * 1000.0 / cfg_.sample_rate_hz));
  }

  void orientation(std::int64_t t, const Quat& q) { out_.push_back(wire::Orientation{t, q}); }
  void touch(std::int64_t t, wire::TouchPhase p, double x, double y) {
    out_.push_back(wire::Touch{t, p, x, y});
  }

  std::vector<wire::Message> take() { return std::move(out_); }
  std::int64_t now() const {
    return t0_ + static_cast<std::int64_t>(
                     std::llround(static_cast<double>(ticks_) * 1000.0 / cfg_.sample_rate_hz));
  }

 private:
  const ControllerConfig& cfg_;
  std::int64_t t0_;
  std::int64_t ticks_ = 0;
  std::vector<wire::Message> out_;
};

/// Slerp ramp from `from` to `to` at the configured angular speed, one
/// orientation sample per tick. Returns the number of samples emitted.
std::size_t ramp(TraceBuilder& b, const ControllerConfig& cfg, const Quat& from, const Quat& to) {
  const double angle = angular_distance_deg(from, to);
  if (angle <= 0.0) return 0;
  const double per_tick = cfg.rotation_speed_deg_s / cfg.sample_rate_hz;
  // The slack keeps e.g. 90 deg at 1.8 deg/tick at 50 steps despite rounding.
  const auto steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(angle / per_tick - 1e-9)));
  for (std::size_t k = 1; k <= steps; ++k) {
    const Quat q = k == steps ? to : slerp(from, to, static_cast<double>(k) / steps);
    b.orientation(b.tick(), q);
  }
  return steps;
}

Quat aim_e1(const Quat& start, const Vec3& direction) {
  const PlaneBasis basis = device_to_plane_basis(start);
  const Vec3 normal = cross(basis.e1, basis.e2);
  return normalized(rotation_between(basis.e1, direction, normal) * start);
}

Trace plan_trajectory(TechniqueMode mode, const Vec3& target, const ControllerConfig& cfg,
                      const TraceContext& ctx) {
  cfg.validate();
  const double dist = norm(target);
  if (!(dist > 0.0)) throw std::invalid_argument("target must differ from the origin");
  if (!(ctx.gain > 0.0) || ctx.screen_w_px <= 0 || ctx.screen_h_px <= 0) {
    throw std::invalid_argument("trace context needs a positive gain and screen size");
  }

  Trace trace;
  TraceBuilder b(cfg, ctx.t0_ms);
  trace.goal = aim_e1(ctx.start, target * (1.0 / dist));

  if (ramp(b, cfg, ctx.start, trace.goal) > 0) {
    for (std::size_t i = 0; i < ctx.settle_samples; ++i) b.orientation(b.tick(), trace.goal);
  }

  // Swipe in strokes of at most 80% of the screen width, left to right.
  const double total_px = dist / ctx.gain;
  const double max_stroke = 0.8 * ctx.screen_w_px;
  const auto strokes = static_cast<std::size_t>(std::ceil(total_px / max_stroke));
  const double stroke = total_px / static_cast<double>(strokes);
  const double px_per_tick = cfg.swipe_speed_px_s / cfg.sample_rate_hz;
  const auto steps = static_cast<std::size_t>(std::ceil(stroke / px_per_tick));
  const double x0 = 0.1 * ctx.screen_w_px;
  const double y = 0.5 * ctx.screen_h_px;

  double du_sum = 0.0;
  for (std::size_t s = 0; s < strokes; ++s) {
    std::int64_t t = b.tick();
    b.orientation(t, trace.goal);
    b.touch(t, wire::TouchPhase::Down, x0, y);
    double x_prev = x0;
    for (std::size_t j = 1; j <= steps; ++j) {
      const double x = j == steps ? x0 + stroke : x0 + stroke * static_cast<double>(j) / steps;
      t = b.tick();
      b.orientation(t, trace.goal);
      b.touch(t, wire::TouchPhase::Move, x, y);
      du_sum += x - x_prev;
      trace.swipe_px += std::abs(x - x_prev);
      x_prev = x;
    }
    t = b.tick();
    b.orientation(t, trace.goal);
    b.touch(t, wire::TouchPhase::Up, x_prev, y);
  }

  // Both techniques start the trial with the cursor at the origin; FreePC
  // rotation leaves it there and PivotPC's zero lever arm does too.
  PlanecastState predicted = apply_rotation(make_state(mode, ctx.gain), trace.goal);
  predicted = apply_touch(predicted, du_sum, 0.0);
  trace.predicted_cursor = predicted.cursor;
  if (distance(predicted.cursor, target) > cfg.stop_distance_cm) {
    throw HarnessFailure("planned trace misses the target by more than stop_distance");
  }

  trace.messages = b.take();
  trace.end_ms = b.now();
  trace.end_orientation = trace.goal;
  return trace;
}

}  // namespace

Trace plan_pivot_trajectory(const Vec3& target, const ControllerConfig& cfg,
                            const TraceContext& ctx) {
  return plan_trajectory(TechniqueMode::PivotPC, target, cfg, ctx);
}

Trace plan_free_trajectory(const Vec3& target, const ControllerConfig& cfg,
                           const TraceContext& ctx) {
  return plan_trajectory(TechniqueMode::FreePC, target, cfg, ctx);
}

// ---------------------------------------------------------------------------
// headless sessions

namespace {

constexpr ConnectionId kPhone = 1;

class Driver {
 public:
  Driver(const std::vector<TrialSpec>& plan, const HeadlessOptions& opts)
      : opts_(opts), session_(opts.session, plan) {
    session_.attach_log(opts.log);
  }

  void send(const wire::Message& m, std::int64_t t) {
    IngestResult r = session_.ingest(kPhone, m, t);
    ++run_.messages;
    now_ = t;
    for (TrialRecord& rec : r.records) run_.records.push_back(rec);
  }

  HeadlessRun run() {
    const ControllerConfig& cfg = opts_.controller;
    cfg.validate();
    send(wire::Hello{opts_.device_id, opts_.screen_w_px, opts_.screen_h_px}, 0);

    const TrialMachine& machine = session_.machine();
    for (std::size_t i = 0; i < machine.plan().size(); ++i) {
      const std::int64_t trial_start = now_;
      const std::size_t records_before = run_.records.size();

      // Back to the flat pose and hold until the filter has settled there.
      TraceBuilder reset(cfg, now_);
      ramp(reset, cfg, device_, Quat::identity());
      device_ = Quat::identity();
      for (std::size_t k = 0; k < session_.config().filter.window; ++k) {
        reset.orientation(reset.tick(), device_);
      }
      for (const auto& m : reset.take()) send(m, wire::timestamp_of(m));
      while (machine.phase() == TrialPhase::AwaitingReset || machine.phase() == TrialPhase::Ended) {
        if (now_ - trial_start > opts_.trial_budget_ms) fail(i, "never became ready");
        TraceBuilder hold(cfg, now_);
        const std::int64_t t = hold.tick();
        send(wire::Orientation{t, device_}, t);
      }
      if (machine.trial_index() != i) fail(i, "session is on a different trial");

      const TrialSpec& spec = machine.current_spec();
      TraceContext ctx;
      ctx.t0_ms = now_;
      ctx.start = device_;
      ctx.gain = session_.gain();
      ctx.screen_w_px = opts_.screen_w_px;
      ctx.screen_h_px = opts_.screen_h_px;
      ctx.settle_samples = session_.config().filter.window;
      const Vec3 target = target_position(spec.position_idx, spec.radius_cm);
      const Trace trace = spec.technique == TechniqueMode::PivotPC
                              ? plan_pivot_trajectory(target, cfg, ctx)
                              : plan_free_trajectory(target, cfg, ctx);
      for (const auto& m : trace.messages) {
        send(m, wire::timestamp_of(m));
      }
      device_ = trace.end_orientation;

      if (!machine.matched()) fail(i, "trace ended without a match");
      TraceBuilder press(cfg, now_);
      const std::int64_t t = press.tick();
      send(wire::Footswitch{t}, t);
      if (run_.records.size() != records_before + 1) fail(i, "footswitch produced no record");
      if (now_ - trial_start > opts_.trial_budget_ms) fail(i, "exceeded the simulated budget");
    }
    run_.simulated_ms = now_;
    return std::move(run_);
  }

 private:
  [[noreturn]] void fail(std::size_t i, const std::string& why) const {
    throw HarnessFailure("trial " + std::to_string(i + 1) + ": " + why);
  }

  const HeadlessOptions& opts_;
  Session session_;
  HeadlessRun run_;
  Quat device_ = Quat::identity();
  std::int64_t now_ = 0;
};

}  // namespace

HeadlessRun run_headless(const std::vector<TrialSpec>& plan, const HeadlessOptions& opts) {
  if (opts.session.device_frame != DeviceFrame::World) {
    throw std::invalid_argument("the synthetic user reports orientation in world axes");
  }
  Driver driver(plan, opts);
  return driver.run();
}

}  // namespace planecast::sim
