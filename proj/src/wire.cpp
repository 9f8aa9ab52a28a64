#include "planecast/wire.hpp"

#include <array>
#include <charconv>
#include <cfloat>
#include <cmath>
#include <limits>
#include <type_traits>

#include <nlohmann/json.hpp>

namespace planecast {

std::string_view to_string(Condition c) { return c == Condition::Speed ? "speed" : "accuracy"; }

Condition condition_from_string(std::string_view s) {
  if (s == "speed") return Condition::Speed;
  if (s == "accuracy") return Condition::Accuracy;
  throw std::invalid_argument("unknown condition '" + std::string(s) +
                              "' (expected speed|accuracy)");
}

}  // namespace planecast

namespace planecast::wire {

using nlohmann::json;

std::string_view to_string(TouchPhase p) {
  switch (p) {
    case TouchPhase::Down: return "down";
    case TouchPhase::Move: return "move";
    case TouchPhase::Up: return "up";
  }
  return "?";
}

std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::UnknownType: return "UnknownType";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::Session: return "SessionError";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxQuotedLine = 200;

std::string clip(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.size() <= kMaxQuotedLine) return std::string(line);
  return std::string(line.substr(0, kMaxQuotedLine)) + "...";
}

std::string describe(ErrorKind kind, std::string_view line, const std::string& detail) {
  return std::string(to_string(kind)) + ": " + detail + " in line: " + clip(line);
}

}  // namespace

ProtocolError::ProtocolError(ErrorKind kind, std::string_view line, const std::string& detail)
    : std::runtime_error(describe(kind, line, detail)), kind_(kind), line_(clip(line)) {}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw EncodeError("non-finite number cannot be encoded");
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// encode

namespace {

/// Appends `"key":value` pairs in insertion order.
class RecordWriter {
 public:
  explicit RecordWriter(std::string_view type) {
    out_ = "{\"type\":";
    out_ += json(std::string(type)).dump();
  }

  RecordWriter& field(std::string_view key, double v) {
    open(key);
    out_ += format_number(v);
    return *this;
  }
  RecordWriter& field(std::string_view key, std::int64_t v) {
    open(key);
    out_ += std::to_string(v);
    return *this;
  }
  RecordWriter& field(std::string_view key, int v) {
    return field(key, static_cast<std::int64_t>(v));
  }
  RecordWriter& field(std::string_view key, bool v) {
    open(key);
    out_ += v ? "true" : "false";
    return *this;
  }
  RecordWriter& field(std::string_view key, std::string_view v) {
    open(key);
    try {
      out_ += json(std::string(v)).dump();
    } catch (const json::type_error& e) {
      throw EncodeError(std::string("string field is not valid UTF-8: ") + e.what());
    }
    return *this;
  }
  RecordWriter& field(std::string_view key, const Vec3& v) {
    open(key);
    out_ += '[' + format_number(v.x) + ',' + format_number(v.y) + ',' + format_number(v.z) + ']';
    return *this;
  }
  RecordWriter& field(std::string_view key, const Quat& q) {
    open(key);
    out_ += '[' + format_number(q.w) + ',' + format_number(q.x) + ',' + format_number(q.y) + ',' +
            format_number(q.z) + ']';
    return *this;
  }

  std::string finish() {
    out_ += "}\n";
    return std::move(out_);
  }

 private:
  void open(std::string_view key) {
    out_ += ",\"";
    out_ += key;
    out_ += "\":";
  }
  std::string out_;
};

struct Encoder {
  std::string operator()(const Hello& m) const {
    return RecordWriter("hello")
        .field("device_id", std::string_view(m.device_id))
        .field("screen_w_px", m.screen_w_px)
        .field("screen_h_px", m.screen_h_px)
        .finish();
  }
  std::string operator()(const Orientation& m) const {
    return RecordWriter("orientation").field("t", m.t).field("q", m.q).finish();
  }
  std::string operator()(const Touch& m) const {
    return RecordWriter("touch")
        .field("t", m.t)
        .field("phase", to_string(m.phase))
        .field("x_px", m.x_px)
        .field("y_px", m.y_px)
        .finish();
  }
  std::string operator()(const Footswitch& m) const {
    return RecordWriter("footswitch").field("t", m.t).finish();
  }
  std::string operator()(const Calibrate& m) const {
    return RecordWriter("calibrate").field("t", m.t).finish();
  }
  std::string operator()(const TrialBegin& m) const {
    return RecordWriter("trial_begin")
        .field("t", m.t)
        .field("trial_id", m.trial_id)
        .field("technique", planecast::to_string(m.technique))
        .field("condition", planecast::to_string(m.condition))
        .field("target", m.target)
        .field("radius_cm", m.radius_cm)
        .finish();
  }
  std::string operator()(const TrialEnd& m) const {
    return RecordWriter("trial_end")
        .field("t", m.t)
        .field("trial_id", m.trial_id)
        .field("mt_ms", m.mt_ms)
        .field("d_cm", m.d_cm)
        .field("t_px", m.t_px)
        .finish();
  }
  std::string operator()(const StateSnapshot& m) const {
    return RecordWriter("state")
        .field("t", m.t)
        .field("cursor", m.cursor)
        .field("pivot", m.pivot)
        .field("e1", m.e1)
        .field("e2", m.e2)
        .field("target", m.target)
        .field("matched", m.matched)
        .field("phase", std::string_view(m.phase))
        .finish();
  }
};

}  // namespace

std::string encode(const Message& m) { return std::visit(Encoder{}, m); }

std::string_view type_tag(const Message& m) {
  struct Tag {
    std::string_view operator()(const Hello&) const { return "hello"; }
    std::string_view operator()(const Orientation&) const { return "orientation"; }
    std::string_view operator()(const Touch&) const { return "touch"; }
    std::string_view operator()(const Footswitch&) const { return "footswitch"; }
    std::string_view operator()(const Calibrate&) const { return "calibrate"; }
    std::string_view operator()(const TrialBegin&) const { return "trial_begin"; }
    std::string_view operator()(const TrialEnd&) const { return "trial_end"; }
    std::string_view operator()(const StateSnapshot&) const { return "state"; }
  };
  return std::visit(Tag{}, m);
}

std::int64_t timestamp_of(const Message& m) {
  return std::visit(
      [](const auto& x) -> std::int64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Hello>) {
          return 0;
        } else {
          return x.t;
        }
      },
      m);
}

// ---------------------------------------------------------------------------
// decode

namespace {

class FieldReader {
 public:
  FieldReader(const json& obj, std::string_view line) : obj_(obj), line_(line) {}

  [[noreturn]] void fail(ErrorKind kind, const std::string& detail) const {
    throw ProtocolError(kind, line_, detail);
  }

  const json& require(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end()) fail(ErrorKind::Schema, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const char* key) const { return as_number(require(key), key); }

  double non_negative(const char* key) const {
    const double v = number(key);
    if (v < 0.0) fail(ErrorKind::Range, std::string("field '") + key + "' must be >= 0");
    return v;
  }

  std::int64_t integer(const char* key) const {
    const json& v = require(key);
    if (v.is_number_integer()) {
      if (v.is_number_unsigned() &&
          v.get<std::uint64_t>() >
              static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(ErrorKind::Range, std::string("field '") + key + "' out of range");
      }
      return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (!std::isfinite(d)) fail(ErrorKind::Range, std::string("field '") + key + "' non-finite");
      if (d != std::trunc(d) || std::abs(d) > 9.0e15) {
        fail(ErrorKind::Schema, std::string("field '") + key + "' must be an integer");
      }
      return static_cast<std::int64_t>(d);
    }
    fail(ErrorKind::Schema, std::string("field '") + key + "' must be an integer");
  }

  int small_int(const char* key) const {
    const std::int64_t v = integer(key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      fail(ErrorKind::Range, std::string("field '") + key + "' out of range");
    }
    return static_cast<int>(v);
  }

  std::string string(const char* key) const {
    const json& v = require(key);
    if (!v.is_string()) fail(ErrorKind::Schema, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  bool boolean(const char* key) const {
    const json& v = require(key);
    if (!v.is_boolean()) {
      fail(ErrorKind::Schema, std::string("field '") + key + "' must be a boolean");
    }
    return v.get<bool>();
  }

  template <std::size_t N>
  std::array<double, N> numbers(const char* key) const {
    const json& v = require(key);
    if (!v.is_array() || v.size() != N) {
      fail(ErrorKind::Schema,
           std::string("field '") + key + "' must be an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = as_number(v[i], key);
    return out;
  }

  Vec3 vec3(const char* key) const {
    const auto a = numbers<3>(key);
    return {a[0], a[1], a[2]};
  }

 private:
  double as_number(const json& v, const char* key) const {
    if (!v.is_number()) fail(ErrorKind::Schema, std::string("field '") + key + "' must be numeric");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorKind::Range, std::string("field '") + key + "' non-finite");
    return d;
  }

  const json& obj_;
  std::string_view line_;
};

Quat unit_quaternion(const FieldReader& r, const char* key) {
  const auto a = r.numbers<4>(key);
  Quat q{a[0], a[1], a[2], a[3]};
  const double n = norm(q);
  if (std::abs(n - 1.0) > kUnitQuatTolerance) {
    r.fail(ErrorKind::Range, "quaternion norm " + format_number(n) + " outside 1 +/- 1e-3");
  }
  // Values already unit to rounding are kept bit-for-bit so decode(encode(m)) == m.
  if (std::abs(n - 1.0) > 4.0 * DBL_EPSILON) q = {q.w / n, q.x / n, q.y / n, q.z / n};
  return q;
}

TouchPhase touch_phase(const FieldReader& r) {
  const std::string s = r.string("phase");
  if (s == "down") return TouchPhase::Down;
  if (s == "move") return TouchPhase::Move;
  if (s == "up") return TouchPhase::Up;
  r.fail(ErrorKind::Schema, "unknown touch phase '" + s + "'");
}

bool known_phase_label(std::string_view s) {
  return s == "awaiting_reset" || s == "ready" || s == "moving" || s == "ended";
}

}  // namespace

Message decode(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::out_of_range&) {
    // e.g. 1e999: well-formed text whose value is not a finite double
    throw ProtocolError(ErrorKind::Range, line, "number out of range");
  } catch (const json::exception&) {
    throw ProtocolError(ErrorKind::Parse, line, "malformed JSON");
  }
  if (!obj.is_object()) throw ProtocolError(ErrorKind::Parse, line, "record is not a JSON object");

  const FieldReader r(obj, line);
  const std::string type = r.string("type");

  if (type == "hello") {
    Hello m{r.string("device_id"), r.small_int("screen_w_px"), r.small_int("screen_h_px")};
    if (m.screen_w_px <= 0 || m.screen_h_px <= 0) {
      r.fail(ErrorKind::Range, "screen dimensions must be positive");
    }
    return m;
  }
  if (type == "orientation") return Orientation{r.integer("t"), unit_quaternion(r, "q")};
  if (type == "touch") {
    return Touch{r.integer("t"), touch_phase(r), r.number("x_px"), r.number("y_px")};
  }
  if (type == "footswitch") return Footswitch{r.integer("t")};
  if (type == "calibrate") return Calibrate{r.integer("t")};
  if (type == "trial_begin") {
    TrialBegin m;
    m.t = r.integer("t");
    m.trial_id = r.small_int("trial_id");
    try {
      m.technique = technique_from_string(r.string("technique"));
      m.condition = condition_from_string(r.string("condition"));
    } catch (const std::invalid_argument& e) {
      r.fail(ErrorKind::Schema, e.what());
    }
    m.target = r.vec3("target");
    m.radius_cm = r.number("radius_cm");
    if (!(m.radius_cm > 0.0)) r.fail(ErrorKind::Range, "radius_cm must be positive");
    return m;
  }
  if (type == "trial_end") {
    return TrialEnd{r.integer("t"), r.small_int("trial_id"), r.non_negative("mt_ms"),
                    r.non_negative("d_cm"), r.non_negative("t_px")};
  }
  if (type == "state") {
    StateSnapshot m;
    m.t = r.integer("t");
    m.cursor = r.vec3("cursor");
    m.pivot = r.vec3("pivot");
    m.e1 = r.vec3("e1");
    m.e2 = r.vec3("e2");
    m.target = r.vec3("target");
    m.matched = r.boolean("matched");
    m.phase = r.string("phase");
    if (!known_phase_label(m.phase)) r.fail(ErrorKind::Schema, "unknown phase '" + m.phase + "'");
    return m;
  }
  throw ProtocolError(ErrorKind::UnknownType, line, "unknown type '" + type + "'");
}

}  // namespace planecast::wire
