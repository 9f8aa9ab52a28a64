#include "planecast/session.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include <nlohmann/json.hpp>

namespace planecast {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(DeviceFrame f) { return f == DeviceFrame::World ? "world" : "phone"; }

DeviceFrame device_frame_from_string(std::string_view s) {
  if (s == "world") return DeviceFrame::World;
  if (s == "phone") return DeviceFrame::Phone;
  throw std::invalid_argument("unknown device frame '" + std::string(s) + "' (expected world|phone)");
}

namespace {

// Placeholder until the first Hello reports the real screen width.
constexpr int kFallbackScreenWidthPx = 480;

constexpr std::string_view kLogTag = "planecast-session";

// Device axes at the flat pose, expressed in world axes: x -> X, y -> -Z, z -> Y.
const Quat kPhoneToWorld = Quat::from_axis_angle(Vec3::unit_x(), -std::numbers::pi / 2.0);

}  // namespace

Session::Session(SessionConfig cfg)
    : Session(cfg, make_session_plan(cfg.seed, cfg.order)) {}

Session::Session(SessionConfig cfg, std::vector<TrialSpec> plan)
    : cfg_(cfg),
      filter_(cfg.filter.window),
      machine_(std::move(plan), cfg.gain.value_or(default_gain(kFallbackScreenWidthPx)),
               TaskConfig{cfg.box_half_extent_cm, cfg.filter.mt_threshold_deg,
                          cfg.filter.reset_tolerance_deg}),
      gain_(cfg.gain.value_or(default_gain(kFallbackScreenWidthPx))) {}

void Session::attach_log(std::ostream* log) {
  log_ = log;
  if (!log_) return;
  ordered_json header;
  header["log"] = kLogTag;
  header["seed"] = cfg_.seed;
  header["technique_order"] = to_string(cfg_.order);
  header["gain"] = cfg_.gain ? json(*cfg_.gain) : json(nullptr);
  header["filter_window"] = cfg_.filter.window;
  header["mt_threshold_deg"] = cfg_.filter.mt_threshold_deg;
  header["reset_tolerance_deg"] = cfg_.filter.reset_tolerance_deg;
  header["box_half_extent_cm"] = cfg_.box_half_extent_cm;
  header["device_frame"] = to_string(cfg_.device_frame);
  json plan = json::array();
  for (const TrialSpec& s : machine_.plan()) {
    plan.push_back({s.position_idx, s.radius_cm, to_string(s.technique), to_string(s.condition)});
  }
  header["plan"] = std::move(plan);
  *log_ << header.dump() << '\n';
}

void Session::log_message(ConnectionId conn, const wire::Message& m, std::int64_t host_ms) {
  if (!log_) return;
  std::string rec = wire::encode(m);
  rec.pop_back();  // newline
  *log_ << "{\"host_t\":" << host_ms << ",\"conn\":" << conn << ",\"msg\":" << rec << "}\n";
}

void Session::log_raw(ConnectionId conn, std::string_view line, std::int64_t host_ms) {
  if (!log_) return;
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  const std::string raw =
      json(std::string(line)).dump(-1, ' ', false, json::error_handler_t::replace);
  *log_ << "{\"host_t\":" << host_ms << ",\"conn\":" << conn << ",\"raw\":" << raw << "}\n";
}

IngestResult Session::ingest(ConnectionId conn, const wire::Message& m, std::int64_t host_ms) {
  log_message(conn, m, host_ms);
  IngestResult out;
  handle(conn, m, host_ms, out);
  return out;
}

IngestResult Session::ingest_line(ConnectionId conn, std::string_view line,
                                  std::int64_t host_ms) {
  wire::Message m;
  try {
    m = wire::decode(line);
  } catch (const wire::ProtocolError& e) {
    log_raw(conn, line, host_ms);
    IngestResult out;
    out.error = e;
    return out;
  }
  try {
    return ingest(conn, m, host_ms);
  } catch (const wire::ProtocolError& e) {
    IngestResult out;
    out.error = e;
    return out;
  }
}

void Session::disconnect(ConnectionId conn) { connections_.erase(conn); }

Quat Session::to_world(const Quat& relative) const {
  if (cfg_.device_frame == DeviceFrame::World) return relative;
  return normalized(kPhoneToWorld * relative * conjugate(kPhoneToWorld));
}

void Session::absorb(const StepResult& step, std::int64_t host_ms, IngestResult& out) {
  if (step.ignored) out.notes.push_back(*step.ignored);
  if (step.trial_began) {
    const TrialSpec& spec = machine_.current_spec();
    out.outbound.push_back(wire::TrialBegin{host_ms, static_cast<int>(machine_.trial_index()) + 1,
                                            spec.technique, spec.condition, machine_.target(),
                                            spec.radius_cm});
  }
  if (step.record) {
    const TrialRecord& r = *step.record;
    records_.push_back(r);
    out.records.push_back(r);
    out.outbound.push_back(wire::TrialEnd{host_ms, r.trial_id, r.mt_ms, r.d_cm, r.t_px});
  }
}

void Session::handle(ConnectionId conn, const wire::Message& m, std::int64_t host_ms,
                     IngestResult& out) {
  if (const auto* hello = std::get_if<wire::Hello>(&m)) {
    connections_[conn] = Connection{};
    if (!cfg_.gain) {
      gain_ = default_gain(hello->screen_w_px);
      machine_.set_gain(gain_);
    }
    out.outbound.push_back(snapshot(host_ms));
    return;
  }

  const auto it = connections_.find(conn);
  if (it == connections_.end()) {
    throw wire::ProtocolError(wire::ErrorKind::Session, wire::encode(m),
                              "'" + std::string(wire::type_tag(m)) + "' received before hello");
  }
  Connection& c = it->second;

  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, wire::Orientation>) {
          const FilterOutput f = filter_.push({msg.t, msg.q});
          if (f.degenerate) out.notes.push_back("filter mean degenerate; using latest sample");
          last_filtered_ = f.q;
          const Quat world = to_world(filter_.relative(f.q));
          absorb(machine_.step(event::Orientation{world}, host_ms), host_ms, out);
        } else if constexpr (std::is_same_v<T, wire::Touch>) {
          switch (msg.phase) {
            case wire::TouchPhase::Down:
              c.has_contact = true;
              c.x = msg.x_px;
              c.y = msg.y_px;
              absorb(machine_.step(event::TouchDown{}, host_ms), host_ms, out);
              break;
            case wire::TouchPhase::Move: {
              if (!c.has_contact) {
                out.notes.push_back("touch move without a preceding down");
                return;
              }
              const double du = msg.x_px - c.x;
              const double dv = msg.y_px - c.y;
              c.x = msg.x_px;
              c.y = msg.y_px;
              absorb(machine_.step(event::TouchMove{du, dv}, host_ms), host_ms, out);
              break;
            }
            case wire::TouchPhase::Up:
              c.has_contact = false;
              absorb(machine_.step(event::TouchUp{}, host_ms), host_ms, out);
              break;
          }
        } else if constexpr (std::is_same_v<T, wire::Footswitch>) {
          absorb(machine_.step(event::Footswitch{}, host_ms), host_ms, out);
        } else if constexpr (std::is_same_v<T, wire::Calibrate>) {
          if (last_filtered_) {
            filter_.calibrate(*last_filtered_);
          } else {
            out.notes.push_back("calibrate before any orientation sample; reference unchanged");
          }
        } else {
          out.notes.push_back("host-to-viewer record '" + std::string(wire::type_tag(m)) +
                              "' ignored on input");
          return;
        }
        out.outbound.push_back(snapshot(host_ms));
      },
      m);
}

wire::StateSnapshot Session::snapshot(std::int64_t t) const {
  const PlanecastState& g = machine_.geometry();
  return {t,
          g.cursor,
          g.plane.pivot,
          g.plane.e1,
          g.plane.e2,
          machine_.target(),
          machine_.matched(),
          std::string(to_string(machine_.phase()))};
}

// ---------------------------------------------------------------------------
// replay

ReplayResult replay_log(std::istream& log) {
  std::string line;
  if (!std::getline(log, line)) throw std::runtime_error("event log is empty");
  const json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || header.value("log", "") != kLogTag) {
    throw std::runtime_error("event log has no session header");
  }

  ReplayResult out;
  try {
    SessionConfig& cfg = out.config;
    cfg.seed = header.at("seed").get<std::uint64_t>();
    cfg.order = technique_order_from_string(header.at("technique_order").get<std::string>());
    if (!header.at("gain").is_null()) cfg.gain = header.at("gain").get<double>();
    cfg.filter.window = header.at("filter_window").get<std::size_t>();
    cfg.filter.mt_threshold_deg = header.at("mt_threshold_deg").get<double>();
    cfg.filter.reset_tolerance_deg = header.at("reset_tolerance_deg").get<double>();
    cfg.box_half_extent_cm = header.at("box_half_extent_cm").get<double>();
    cfg.device_frame = device_frame_from_string(header.at("device_frame").get<std::string>());
    for (const json& s : header.at("plan")) {
      out.plan.push_back({s.at(0).get<int>(), s.at(1).get<double>(),
                          technique_from_string(s.at(2).get<std::string>()),
                          condition_from_string(s.at(3).get<std::string>())});
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("bad event log header: ") + e.what());
  }

  Session session(out.config, out.plan);
  std::size_t lineno = 1;
  while (std::getline(log, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("host_t") ||
        !rec.contains("conn")) {
      throw std::runtime_error("malformed event log record at line " + std::to_string(lineno));
    }
    const auto host_t = rec["host_t"].get<std::int64_t>();
    const auto conn = rec["conn"].get<ConnectionId>();
    std::string payload;
    if (rec.contains("msg")) {
      payload = rec["msg"].dump();
    } else if (rec.contains("raw") && rec["raw"].is_string()) {
      payload = rec["raw"].get<std::string>();
    } else {
      throw std::runtime_error("event log record without msg/raw at line " +
                               std::to_string(lineno));
    }
    IngestResult r = session.ingest_line(conn, payload, host_t);
    if (r.error) ++out.errors;
    for (auto& rec_out : r.records) out.records.push_back(rec_out);
    for (auto& m : r.outbound) {
      if (auto* s = std::get_if<wire::StateSnapshot>(&m)) out.snapshots.push_back(std::move(*s));
    }
  }
  return out;
}

}  // namespace planecast
