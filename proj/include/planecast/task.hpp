#pragma once

// Docking-task experiment: target layout, session plans and the per-trial
// phase machine that turns orientation/touch/footswitch events into
// TrialRecords.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planecast/condition.hpp"
#include "planecast/geometry.hpp"
#include "planecast/orientation_filter.hpp"

namespace planecast {

constexpr int kTargetPositions = 12;
constexpr std::array<double, 2> kTargetRadiiCm{52.0, 96.0};
constexpr std::size_t kTrialsPerSession = 96;

/// Unit direction for target index 1..12. 1-8 are the (+-1/2, +-1/2, +-sqrt(2)/2)
/// diagonals ordered by sign pattern (+++, ++-, +-+, ...); 9/10 are +X/-X and
/// 11/12 are +Y/-Y. There is no front/back (+-Z) target.
Vec3 target_direction(int idx);
Vec3 target_position(int idx, double radius_cm);

struct TrialSpec {
  int position_idx = 1;
  double radius_cm = 52.0;
  TechniqueMode technique = TechniqueMode::PivotPC;
  Condition condition = Condition::Speed;
  bool operator==(const TrialSpec&) const = default;
};

enum class TechniqueOrder { PivotFirst, FreeFirst };
std::string_view to_string(TechniqueOrder o);
TechniqueOrder technique_order_from_string(std::string_view s);
/// The CLI's --technique flag names the block that runs first.
TechniqueOrder order_starting_with(TechniqueMode first);

/// 96 trials: one block per technique in the given order. Inside a block the
/// condition alternates trial by trial (the second block starts with the other
/// condition) and the 24 position x radius cells are shuffled per condition
/// with a seeded mt19937_64.
std::vector<TrialSpec> make_session_plan(std::uint64_t seed, TechniqueOrder order);

struct Aabb {
  Vec3 center;
  Vec3 half_extents{4.0, 4.0, 4.0};
};

/// Closed-interval overlap test: touching boxes intersect.
bool aabb_intersect(const Aabb& a, const Aabb& b);

enum class TrialPhase { AwaitingReset, Ready, Moving, Ended };
std::string_view to_string(TrialPhase p);

struct TrialRecord {
  int trial_id = 0;
  TrialSpec spec;
  double mt_ms = 0.0;
  double d_cm = 0.0;
  double t_px = 0.0;
  std::int64_t started_at_ms = 0;
  std::int64_t ended_at_ms = 0;
  bool matched_at_end = true;
  bool operator==(const TrialRecord&) const = default;
};

struct TaskConfig {
  double box_half_extent_cm = 4.0;  // cursor and target are 8 cm cubes
  double mt_threshold_deg = 3.6;
  double reset_tolerance_deg = 5.0;
};

namespace event {
/// Filtered device orientation relative to the reference pose.
struct Orientation {
  Quat q;
};
struct TouchDown {};
struct TouchMove {
  double du_px = 0.0;
  double dv_px = 0.0;
};
struct TouchUp {};
struct Footswitch {};
}  // namespace event

/// Adds the length of one finger move segment to a running total.
double accumulate_touch_travel(double running_px, double du_px, double dv_px);

struct StepResult {
  std::optional<TrialRecord> record;
  bool trial_began = false;
  /// Set when the event was dropped (e.g. footswitch without a match).
  std::optional<std::string> ignored;
};

struct PhaseTransition {
  TrialPhase from;
  TrialPhase to;
  std::int64_t at_ms;
};

/// Single-owner phase machine for a whole session plan:
/// AwaitingReset -> Ready -> Moving -> Ended -> AwaitingReset (next trial).
class TrialMachine {
 public:
  TrialMachine(std::vector<TrialSpec> plan, double gain, TaskConfig cfg = {});

  StepResult step(const event::Orientation& e, std::int64_t now_ms);
  StepResult step(const event::TouchDown& e, std::int64_t now_ms);
  StepResult step(const event::TouchMove& e, std::int64_t now_ms);
  StepResult step(const event::TouchUp& e, std::int64_t now_ms);
  StepResult step(const event::Footswitch& e, std::int64_t now_ms);

  TrialPhase phase() const { return phase_; }
  /// True once the last trial has ended.
  bool finished() const { return phase_ == TrialPhase::Ended && index_ + 1 >= plan_.size(); }
  std::size_t trial_index() const { return index_; }
  const TrialSpec& current_spec() const { return plan_.at(index_); }
  const std::vector<TrialSpec>& plan() const { return plan_; }
  const PlanecastState& geometry() const { return geometry_; }
  Vec3 target() const { return target_; }
  bool matched() const { return matched_; }
  double touch_travel_px() const { return travel_px_; }
  std::optional<std::int64_t> mt_started_at() const { return mt_start_; }
  const std::vector<PhaseTransition>& transitions() const { return transitions_; }
  const TaskConfig& config() const { return cfg_; }

  /// Gain changes apply from the next Ready transition on.
  void set_gain(double gain);

 private:
  void enter(TrialPhase next, std::int64_t now_ms);
  void leave_ended(std::int64_t now_ms);
  void begin_moving(std::int64_t now_ms);
  void update_match();
  Aabb box_at(const Vec3& c) const;

  std::vector<TrialSpec> plan_;
  TaskConfig cfg_;
  double gain_;
  std::size_t index_ = 0;
  TrialPhase phase_ = TrialPhase::AwaitingReset;
  PlanecastState geometry_;
  Quat last_q_ = Quat::identity();
  Quat trial_start_q_ = Quat::identity();
  Vec3 target_;
  bool matched_ = false;
  double travel_px_ = 0.0;
  std::optional<std::int64_t> mt_start_;
  std::vector<PhaseTransition> transitions_;
};

/// Columns: trial_id,technique,condition,position_idx,radius_cm,mt_ms,d_cm,t_px
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
/// Columns: trial_id,technique,condition,position_idx,radius_cm
void write_plan_csv(std::ostream& out, const std::vector<TrialSpec>& plan);

}  // namespace planecast
