#pragma once

// Host-side session: routes decoded wire records through the orientation
// filter, the Plane-Casting kinematics and the trial machine, and produces
// the outbound broadcast (state snapshots plus trial lifecycle records).
//
// A Session is owned by exactly one executor. Every ingested record is
// written to the optional event log together with its host arrival time, so
// a log replayed through replay_log() reproduces the same outputs.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planecast/orientation_filter.hpp"
#include "planecast/task.hpp"
#include "planecast/wire.hpp"

namespace planecast {

/// Axes in which the phone reports orientation.
///   World: already in host axes (X right, Y up, Z toward viewer).
///   Phone: device axes (x right, y top of device, z out of screen); the host
///          maps the flat pose onto the world before building the plane.
enum class DeviceFrame { World, Phone };
std::string_view to_string(DeviceFrame f);
DeviceFrame device_frame_from_string(std::string_view s);

struct SessionConfig {
  std::uint64_t seed = 1;
  TechniqueOrder order = TechniqueOrder::PivotFirst;
  /// cm per px. Unset: 40 cm / screen width from the first Hello.
  std::optional<double> gain;
  FilterConfig filter;
  double box_half_extent_cm = 4.0;
  DeviceFrame device_frame = DeviceFrame::World;
};

using ConnectionId = std::uint64_t;

struct IngestResult {
  /// Records to broadcast, in order: trial_begin / trial_end / state.
  std::vector<wire::Message> outbound;
  std::vector<TrialRecord> records;
  /// Events that were accepted but had no effect, with the reason.
  std::vector<std::string> notes;
  std::optional<wire::ProtocolError> error;
};

class Session {
 public:
  explicit Session(SessionConfig cfg);
  Session(SessionConfig cfg, std::vector<TrialSpec> plan);

  /// Writes the log header immediately; every later ingest appends one line.
  void attach_log(std::ostream* log);

  /// Throws wire::ProtocolError (kind Session) if the connection has not sent Hello.
  IngestResult ingest(ConnectionId conn, const wire::Message& m, std::int64_t host_ms);

  /// Decodes and ingests one line. Never throws on bad input: decode and
  /// ordering failures come back in IngestResult::error.
  IngestResult ingest_line(ConnectionId conn, std::string_view line, std::int64_t host_ms);

  /// Drops per-connection state (Hello, touch contact).
  void disconnect(ConnectionId conn);

  wire::StateSnapshot snapshot(std::int64_t t) const;

  const TrialMachine& machine() const { return machine_; }
  const OrientationFilter& filter() const { return filter_; }
  const SessionConfig& config() const { return cfg_; }
  double gain() const { return gain_; }
  const std::vector<TrialRecord>& records() const { return records_; }
  std::optional<Quat> last_filtered() const { return last_filtered_; }

 private:
  struct Connection {
    bool has_contact = false;
    double x = 0.0;
    double y = 0.0;
  };

  void handle(ConnectionId conn, const wire::Message& m, std::int64_t host_ms, IngestResult& out);
  void absorb(const StepResult& step, std::int64_t host_ms, IngestResult& out);
  Quat to_world(const Quat& relative) const;
  void log_message(ConnectionId conn, const wire::Message& m, std::int64_t host_ms);
  void log_raw(ConnectionId conn, std::string_view line, std::int64_t host_ms);

  SessionConfig cfg_;
  OrientationFilter filter_;
  TrialMachine machine_;
  double gain_;
  std::map<ConnectionId, Connection> connections_;
  std::optional<Quat> last_filtered_;
  std::vector<TrialRecord> records_;
  std::ostream* log_ = nullptr;
};

struct ReplayResult {
  SessionConfig config;
  std::vector<TrialSpec> plan;
  std::vector<TrialRecord> records;
  std::vector<wire::StateSnapshot> snapshots;
  std::size_t errors = 0;
};

/// Re-runs a session event log. Throws std::runtime_error on a malformed log.
ReplayResult replay_log(std::istream& log);

}  // namespace planecast
