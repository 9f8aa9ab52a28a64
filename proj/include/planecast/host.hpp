#pragma once

// TCP host for live sessions. One listening port speaks the wire records two
// ways: raw newline-delimited lines for native clients, and WebSocket text
// frames for browsers (detected from the HTTP upgrade request). Every
// connection receives the broadcast; any connection that sends Hello may drive
// the session.
//
// All session work runs on the io_context the Host was built with; run that
// context from one thread.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>

#include "planecast/session.hpp"

namespace planecast {

struct HostOptions {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  SessionConfig session;
  /// Session event log (JSONL), optional.
  std::ostream* log = nullptr;
  /// Called for every completed trial.
  std::function<void(const TrialRecord&)> on_record;
  /// Diagnostics (decode errors, ignored events). Defaults to std::clog.
  std::function<void(const std::string&)> on_diagnostic;
};

class Host {
 public:
  Host(boost::asio::io_context& io, HostOptions opts);
  ~Host();
  Host(const Host&) = delete;
  Host& operator=(const Host&) = delete;

  /// Binds and starts accepting. Throws boost::system::system_error on bind failure.
  void start();
  /// Closes the listener and every connection.
  void stop();

  std::uint16_t port() const;

  struct Impl;  // defined in host.cpp

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace planecast
