#include "planecast/task.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "planecast/wire.hpp"

namespace planecast {

Vec3 target_direction(int idx) {
  if (idx < 1 || idx > kTargetPositions) {
    throw std::out_of_range("target index " + std::to_string(idx) + " outside 1..12");
  }
  if (idx <= 8) {
    // Bits of (idx - 1), most significant first, select the sign of x, y, z.
    const int bits = idx - 1;
    const double sx = (bits & 4) ? -1.0 : 1.0;
    const double sy = (bits & 2) ? -1.0 : 1.0;
    const double sz = (bits & 1) ? -1.0 : 1.0;
    const double h = std::sqrt(2.0) / 2.0;
    return {sx * 0.5, sy * 0.5, sz * h};
  }
  switch (idx) {
    case 9: return Vec3::unit_x();
    case 10: return -Vec3::unit_x();
    case 11: return Vec3::unit_y();
    default: return -Vec3::unit_y();
  }
}

Vec3 target_position(int idx, double radius_cm) {
  if (!(radius_cm > 0.0) || !std::isfinite(radius_cm)) {
    throw std::invalid_argument("target radius must be positive");
  }
  return radius_cm * target_direction(idx);
}

std::string_view to_string(TechniqueOrder o) {
  return o == TechniqueOrder::PivotFirst ? "pivot-first" : "free-first";
}

TechniqueOrder technique_order_from_string(std::string_view s) {
  if (s == "pivot-first" || s == "pivot") return TechniqueOrder::PivotFirst;
  if (s == "free-first" || s == "free") return TechniqueOrder::FreeFirst;
  throw std::invalid_argument("unknown technique order '" + std::string(s) + "'");
}

TechniqueOrder order_starting_with(TechniqueMode first) {
  return first == TechniqueMode::PivotPC ? TechniqueOrder::PivotFirst : TechniqueOrder::FreeFirst;
}

namespace {

// Unbiased index in [0, n) from raw engine output. std::shuffle's
// distribution is implementation-defined, which would make plans differ
// across standard libraries.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound + 1) % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r > limit);
  return static_cast<std::size_t>(r % bound);
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace

std::vector<TrialSpec> make_session_plan(std::uint64_t seed, TechniqueOrder order) {
  std::mt19937_64 rng(seed);
  const std::array<TechniqueMode, 2> blocks =
      order == TechniqueOrder::PivotFirst
          ? std::array{TechniqueMode::PivotPC, TechniqueMode::FreePC}
          : std::array{TechniqueMode::FreePC, TechniqueMode::PivotPC};

  struct Cell {
    int position;
    double radius;
  };
  std::vector<TrialSpec> plan;
  plan.reserve(kTrialsPerSession);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::array<std::vector<Cell>, 2> per_condition;
    for (auto& cells : per_condition) {
      for (int p = 1; p <= kTargetPositions; ++p) {
        for (double r : kTargetRadiiCm) cells.push_back({p, r});
      }
      seeded_shuffle(cells, rng);
    }
    const Condition first = b == 0 ? Condition::Speed : Condition::Accuracy;
    const Condition second = first == Condition::Speed ? Condition::Accuracy : Condition::Speed;
    for (std::size_t i = 0; i < per_condition[0].size(); ++i) {
      const Cell a = per_condition[0][i];
      const Cell c = per_condition[1][i];
      plan.push_back({a.position, a.radius, blocks[b], first});
      plan.push_back({c.position, c.radius, blocks[b], second});
    }
  }
  return plan;
}

bool aabb_intersect(const Aabb& a, const Aabb& b) {
  return std::abs(a.center.x - b.center.x) <= a.half_extents.x + b.half_extents.x &&
         std::abs(a.center.y - b.center.y) <= a.half_extents.y + b.half_extents.y &&
         std::abs(a.center.z - b.center.z) <= a.half_extents.z + b.half_extents.z;
}

std::string_view to_string(TrialPhase p) {
  switch (p) {
    case TrialPhase::AwaitingReset: return "awaiting_reset";
    case TrialPhase::Ready: return "ready";
    case TrialPhase::Moving: return "moving";
    case TrialPhase::Ended: return "ended";
  }
  return "?";
}

double accumulate_touch_travel(double running_px, double du_px, double dv_px) {
  return running_px + std::hypot(du_px, dv_px);
}

// ---------------------------------------------------------------------------
// TrialMachine

TrialMachine::TrialMachine(std::vector<TrialSpec> plan, double gain, TaskConfig cfg)
    : plan_(std::move(plan)), cfg_(cfg), gain_(gain) {
  if (plan_.empty()) throw std::invalid_argument("session plan is empty");
  if (!(cfg_.box_half_extent_cm > 0.0)) throw std::invalid_argument("box size must be positive");
  geometry_ = make_state(plan_.front().technique, gain_);
  target_ = target_position(plan_.front().position_idx, plan_.front().radius_cm);
}

void TrialMachine::set_gain(double gain) {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw std::invalid_argument("gain must be positive");
  gain_ = gain;
}

Aabb TrialMachine::box_at(const Vec3& c) const {
  const double h = cfg_.box_half_extent_cm;
  return {c, {h, h, h}};
}

void TrialMachine::update_match() {
  matched_ = aabb_intersect(box_at(geometry_.cursor), box_at(target_));
}

void TrialMachine::enter(TrialPhase next, std::int64_t now_ms) {
  transitions_.push_back({phase_, next, now_ms});
  phase_ = next;
}

void TrialMachine::leave_ended(std::int64_t now_ms) {
  if (index_ + 1 >= plan_.size()) return;
  ++index_;
  target_ = target_position(plan_[index_].position_idx, plan_[index_].radius_cm);
  enter(TrialPhase::AwaitingReset, now_ms);
}

void TrialMachine::begin_moving(std::int64_t now_ms) {
  mt_start_ = now_ms;
  enter(TrialPhase::Moving, now_ms);
}

StepResult TrialMachine::step(const event::Orientation& e, std::int64_t now_ms) {
  if (phase_ == TrialPhase::Ended) leave_ended(now_ms);
  StepResult out;
  last_q_ = e.q;
  geometry_ = apply_rotation(geometry_, e.q);

  switch (phase_) {
    case TrialPhase::AwaitingReset:
      if (angular_distance_deg(Quat::identity(), e.q) <= cfg_.reset_tolerance_deg) {
        const TrialSpec& spec = plan_[index_];
        geometry_ = apply_rotation(make_state(spec.technique, gain_), e.q);
        target_ = target_position(spec.position_idx, spec.radius_cm);
        trial_start_q_ = e.q;
        travel_px_ = 0.0;
        mt_start_.reset();
        enter(TrialPhase::Ready, now_ms);
        update_match();
        out.trial_began = true;
      }
      break;
    case TrialPhase::Ready:
      if (mt_threshold_crossed(trial_start_q_, e.q, cfg_.mt_threshold_deg)) begin_moving(now_ms);
      update_match();
      break;
    case TrialPhase::Moving:
      update_match();
      break;
    case TrialPhase::Ended:
      break;
  }
  return out;
}

StepResult TrialMachine::step(const event::TouchDown&, std::int64_t now_ms) {
  if (phase_ == TrialPhase::Ended) leave_ended(now_ms);
  StepResult out;
  if (phase_ == TrialPhase::AwaitingReset) {
    out.ignored = "touch ignored while awaiting reset";
  } else if (phase_ == TrialPhase::Ready) {
    begin_moving(now_ms);
  }
  return out;
}

StepResult TrialMachine::step(const event::TouchMove& e, std::int64_t now_ms) {
  if (phase_ == TrialPhase::Ended) leave_ended(now_ms);
  StepResult out;
  switch (phase_) {
    case TrialPhase::AwaitingReset:
      out.ignored = "touch ignored while awaiting reset";
      return out;
    case TrialPhase::Ready:
      // A contact that went down before the trial became ready counts as a swipe start.
      begin_moving(now_ms);
      break;
    case TrialPhase::Moving:
      break;
    case TrialPhase::Ended:
      out.ignored = "session finished";
      return out;
  }
  geometry_ = apply_touch(geometry_, e.du_px, e.dv_px);
  travel_px_ = accumulate_touch_travel(travel_px_, e.du_px, e.dv_px);
  update_match();
  return out;
}

StepResult TrialMachine::step(const event::TouchUp&, std::int64_t now_ms) {
  if (phase_ == TrialPhase::Ended) leave_ended(now_ms);
  return {};
}

StepResult TrialMachine::step(const event::Footswitch&, std::int64_t now_ms) {
  if (phase_ == TrialPhase::Ended) leave_ended(now_ms);
  StepResult out;
  if (phase_ != TrialPhase::Moving) {
    out.ignored = "footswitch ignored in phase " + std::string(to_string(phase_));
    return out;
  }
  if (!matched_) {
    out.ignored = "footswitch ignored: cursor does not match target";
    return out;
  }
  TrialRecord rec;
  rec.trial_id = static_cast<int>(index_) + 1;
  rec.spec = plan_[index_];
  rec.mt_ms = static_cast<double>(now_ms - *mt_start_);
  rec.d_cm = distance(geometry_.cursor, target_);
  rec.t_px = travel_px_;
  rec.started_at_ms = *mt_start_;
  rec.ended_at_ms = now_ms;
  rec.matched_at_end = true;
  out.record = rec;

  enter(TrialPhase::Ended, now_ms);
  // Cursor and target disappear; the FreePC pivot returns to the scene center.
  geometry_ = apply_rotation(make_state(geometry_.mode, gain_), last_q_);
  matched_ = false;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void write_spec_columns(std::ostream& out, const TrialSpec& s) {
  out << to_string(s.technique) << ',' << to_string(s.condition) << ',' << s.position_idx << ','
      << wire::format_number(s.radius_cm);
}

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial_id,technique,condition,position_idx,radius_cm,mt_ms,d_cm,t_px\n";
  for (const TrialRecord& r : records) {
    out << r.trial_id << ',';
    write_spec_columns(out, r.spec);
    out << ',' << wire::format_number(r.mt_ms) << ',' << wire::format_number(r.d_cm) << ','
        << wire::format_number(r.t_px) << '\n';
  }
}

void write_plan_csv(std::ostream& out, const std::vector<TrialSpec>& plan) {
  out << "trial_id,technique,condition,position_idx,radius_cm\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    out << i + 1 << ',';
    write_spec_columns(out, plan[i]);
    out << '\n';
  }
}

}  // namespace planecast
