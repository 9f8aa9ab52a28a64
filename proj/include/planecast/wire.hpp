#pragma once

// Newline-delimited JSON records exchanged between the phone, the host and
// viewers. Every record is one object with a lowercase "type" tag first.
//
//   phone -> host : hello, orientation, touch, footswitch, calibrate
//   host -> viewer: state, trial_begin, trial_end

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "planecast/condition.hpp"
#include "planecast/geometry.hpp"
#include "planecast/math.hpp"

namespace planecast::wire {

enum class TouchPhase { Down, Move, Up };

std::string_view to_string(TouchPhase p);

struct Hello {
  std::string device_id;
  int screen_w_px = 0;
  int screen_h_px = 0;
  bool operator==(const Hello&) const = default;
};

struct Orientation {
  std::int64_t t = 0;
  Quat q;
  bool operator==(const Orientation&) const = default;
};

struct Touch {
  std::int64_t t = 0;
  TouchPhase phase = TouchPhase::Down;
  double x_px = 0.0;
  double y_px = 0.0;
  bool operator==(const Touch&) const = default;
};

struct Footswitch {
  std::int64_t t = 0;
  bool operator==(const Footswitch&) const = default;
};

/// Captures the current filtered orientation as the flat reference pose.
struct Calibrate {
  std::int64_t t = 0;
  bool operator==(const Calibrate&) const = default;
};

struct TrialBegin {
  std::int64_t t = 0;
  int trial_id = 0;
  TechniqueMode technique = TechniqueMode::PivotPC;
  Condition condition = Condition::Speed;
  Vec3 target;
  double radius_cm = 0.0;
  bool operator==(const TrialBegin&) const = default;
};

struct TrialEnd {
  std::int64_t t = 0;
  int trial_id = 0;
  double mt_ms = 0.0;
  double d_cm = 0.0;
  double t_px = 0.0;
  bool operator==(const TrialEnd&) const = default;
};

struct StateSnapshot {
  std::int64_t t = 0;
  Vec3 cursor;
  Vec3 pivot;
  Vec3 e1;
  Vec3 e2;
  Vec3 target;
  bool matched = false;
  std::string phase;
  bool operator==(const StateSnapshot&) const = default;
};

using Message = std::variant<Hello, Orientation, Touch, Footswitch, Calibrate, TrialBegin,
                             TrialEnd, StateSnapshot>;

std::string_view type_tag(const Message& m);
/// Sender timestamp in ms; Hello carries none and yields 0.
std::int64_t timestamp_of(const Message& m);

enum class ErrorKind { Parse, UnknownType, Schema, Range, Session };
std::string_view to_string(ErrorKind k);

/// A rejected record. `line` holds the offending input (truncated for logging).
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorKind kind, std::string_view line, const std::string& detail);
  ErrorKind kind() const { return kind_; }
  const std::string& line() const { return line_; }

 private:
  ErrorKind kind_;
  std::string line_;
};

/// Thrown by encode() when a numeric field is NaN or infinite.
class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One record, newline-terminated. Numbers use the shortest round-trip form.
std::string encode(const Message& m);

/// Parses one record (a trailing newline is allowed). Throws ProtocolError.
Message decode(std::string_view line);

/// Shortest decimal text that parses back to exactly `v` ("1" for 1.0).
std::string format_number(double v);

}  // namespace planecast::wire
