#include "planecast/host.hpp"

#include <chrono>
#include <deque>
#include <iostream>
#include <map>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/read_until.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/streambuf.hpp>
#include <boost/asio/write.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace planecast {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using boost::system::error_code;

namespace {

constexpr std::size_t kMaxLineBytes = 64 * 1024;
constexpr std::size_t kMaxQueuedRecords = 4096;
constexpr auto kSniffTimeout = std::chrono::milliseconds(250);

using Record = std::shared_ptr<const std::string>;

}  // namespace

class Peer;

struct Host::Impl : std::enable_shared_from_this<Host::Impl> {
  Impl(asio::io_context& io, HostOptions o)
      : io(io), opts(std::move(o)), acceptor(io), session(opts.session),
        t0(std::chrono::steady_clock::now()) {
    session.attach_log(opts.log);
    if (!opts.on_diagnostic) {
      opts.on_diagnostic = [](const std::string& s) { std::clog << "[host] " << s << '\n'; };
    }
  }

  void accept();
  void sniff(tcp::socket socket);
  void adopt(const std::shared_ptr<Peer>& peer);
  void on_line(ConnectionId id, std::string_view line);
  void on_closed(ConnectionId id);
  void broadcast(const std::vector<wire::Message>& messages);
  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 t0)
        .count();
  }

  asio::io_context& io;
  HostOptions opts;
  tcp::acceptor acceptor;
  Session session;
  std::map<ConnectionId, std::shared_ptr<Peer>> peers;
  ConnectionId next_id = 1;
  std::chrono::steady_clock::time_point t0;
  bool stopped = false;
};

// ---------------------------------------------------------------------------
// peers

class Peer : public std::enable_shared_from_this<Peer> {
 public:
  Peer(std::shared_ptr<Host::Impl> host, ConnectionId id) : host_(std::move(host)), id_(id) {}
  virtual ~Peer() = default;

  ConnectionId id() const { return id_; }
  virtual void start() = 0;
  virtual void close() = 0;

  void deliver(Record rec) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedRecords) {
      host_->opts.on_diagnostic("connection " + std::to_string(id_) + " too slow; dropping it");
      fail();
      return;
    }
    queue_.push_back(std::move(rec));
    if (!writing_ && ready_) write_next();
  }

 protected:
  virtual void write_front() = 0;

  void write_next() {
    if (queue_.empty() || closed_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    write_front();
  }

  void on_written(error_code ec) {
    if (ec) {
      fail();
      return;
    }
    queue_.pop_front();
    write_next();
  }

  void lines_in(std::string_view text) {
    while (!text.empty()) {
      const auto nl = text.find('\n');
      const std::string_view line = text.substr(0, nl);
      if (line.find_first_not_of(" \t\r") != std::string_view::npos) host_->on_line(id_, line);
      if (nl == std::string_view::npos) break;
      text.remove_prefix(nl + 1);
    }
  }

  void fail() {
    if (closed_) return;
    close();
    host_->on_closed(id_);
  }

  std::shared_ptr<Host::Impl> host_;
  ConnectionId id_;
  std::deque<Record> queue_;
  bool writing_ = false;
  bool ready_ = false;
  bool closed_ = false;
};

/// Raw newline-delimited records over TCP.
class LinePeer final : public Peer {
 public:
  LinePeer(std::shared_ptr<Host::Impl> host, ConnectionId id, tcp::socket socket)
      : Peer(std::move(host), id), socket_(std::move(socket)), in_(kMaxLineBytes) {}

  void start() override {
    ready_ = true;
    write_next();
    read();
  }

  void close() override {
    closed_ = true;
    error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

 private:
  void read() {
    asio::async_read_until(socket_, in_, '\n',
                           [self = shared_from_this(), this](error_code ec, std::size_t n) {
                             if (closed_) return;
                             if (ec) {
                               fail();
                               return;
                             }
                             const auto data = in_.data();
                             const std::string line(asio::buffers_begin(data),
                                                    asio::buffers_begin(data) + n);
                             in_.consume(n);
                             lines_in(line);
                             if (!closed_) read();
                           });
  }

  void write_front() override {
    asio::async_write(socket_, asio::buffer(*queue_.front()),
                      [self = shared_from_this(), this](error_code ec, std::size_t) {
                        on_written(ec);
                      });
  }

  tcp::socket socket_;
  asio::streambuf in_;
};

/// Browser clients: one record per WebSocket text frame (frames holding
/// several newline-separated records are accepted too).
class WsPeer final : public Peer {
 public:
  WsPeer(std::shared_ptr<Host::Impl> host, ConnectionId id, tcp::socket socket)
      : Peer(std::move(host), id), ws_(std::move(socket)) {}

  void start() override {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxLineBytes);
    ws_.async_accept([self = shared_from_this(), this](error_code ec) {
      if (closed_) return;
      if (ec) {
        fail();
        return;
      }
      ws_.text(true);
      ready_ = true;
      write_next();
      read();
    });
  }

  void close() override {
    closed_ = true;
    error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).close();
  }

 private:
  void read() {
    ws_.async_read(in_, [self = shared_from_this(), this](error_code ec, std::size_t) {
      if (closed_) return;
      if (ec) {
        fail();
        return;
      }
      const std::string text = beast::buffers_to_string(in_.data());
      in_.consume(in_.size());
      lines_in(text);
      if (!closed_) read();
    });
  }

  void write_front() override {
    ws_.async_write(asio::buffer(*queue_.front()),
                    [self = shared_from_this(), this](error_code ec, std::size_t) {
                      on_written(ec);
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer in_;
};

// ---------------------------------------------------------------------------
// host

void Host::Impl::accept() {
  acceptor.async_accept([self = shared_from_this()](error_code ec, tcp::socket socket) {
    if (self->stopped) return;
    if (!ec) {
      self->sniff(std::move(socket));
    } else if (ec != asio::error::operation_aborted) {
      self->opts.on_diagnostic("accept failed: " + ec.message());
    }
    self->accept();
  });
}

// Browsers open with "GET ..." for the upgrade; anything else is a line client.
// A client that stays silent (a pure viewer) is treated as a line client.
void Host::Impl::sniff(tcp::socket socket) {
  struct Sniff {
    explicit Sniff(tcp::socket s) : socket(std::move(s)), timer(socket.get_executor()) {}
    tcp::socket socket;
    asio::steady_timer timer;
    char first = 0;
    bool timed_out = false;
  };
  auto state = std::make_shared<Sniff>(std::move(socket));
  state->timer.expires_after(kSniffTimeout);
  state->timer.async_wait([state](error_code ec) {
    if (ec) return;
    state->timed_out = true;
    error_code ignored;
    state->socket.cancel(ignored);
  });
  state->socket.async_receive(
      asio::buffer(&state->first, 1), tcp::socket::message_peek,
      [self = shared_from_this(), state](error_code ec, std::size_t n) {
        state->timer.cancel();
        if (self->stopped) return;
        const ConnectionId id = self->next_id++;
        if (!ec && n == 1 && state->first == 'G') {
          self->adopt(std::make_shared<WsPeer>(self, id, std::move(state->socket)));
        } else if ((!ec && n == 1) || (ec == asio::error::operation_aborted && state->timed_out)) {
          self->adopt(std::make_shared<LinePeer>(self, id, std::move(state->socket)));
        }
      });
}

void Host::Impl::adopt(const std::shared_ptr<Peer>& peer) {
  peers[peer->id()] = peer;
  peer->start();
}

void Host::Impl::on_line(ConnectionId id, std::string_view line) {
  IngestResult r = session.ingest_line(id, line, now_ms());
  if (r.error) {
    opts.on_diagnostic("connection " + std::to_string(id) + ": " + r.error->what());
  }
  for (const std::string& note : r.notes) {
    opts.on_diagnostic("connection " + std::to_string(id) + ": " + note);
  }
  if (opts.log) opts.log->flush();
  for (const TrialRecord& rec : r.records) {
    if (opts.on_record) opts.on_record(rec);
  }
  broadcast(r.outbound);
}

void Host::Impl::on_closed(ConnectionId id) {
  session.disconnect(id);
  peers.erase(id);
}

void Host::Impl::broadcast(const std::vector<wire::Message>& messages) {
  for (const wire::Message& m : messages) {
    const auto rec = std::make_shared<const std::string>(wire::encode(m));
    // deliver() may drop a slow peer, which erases it from the map.
    std::vector<std::shared_ptr<Peer>> targets;
    targets.reserve(peers.size());
    for (const auto& [id, peer] : peers) targets.push_back(peer);
    for (const auto& peer : targets) peer->deliver(rec);
  }
}

Host::Host(asio::io_context& io, HostOptions opts)
    : impl_(std::make_shared<Impl>(io, std::move(opts))) {}

Host::~Host() { stop(); }

void Host::start() {
  const tcp::endpoint ep(asio::ip::make_address(impl_->opts.bind_address), impl_->opts.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->accept();
}

void Host::stop() {
  if (!impl_ || impl_->stopped) return;
  impl_->stopped = true;
  error_code ignored;
  impl_->acceptor.close(ignored);
  auto peers = std::move(impl_->peers);
  impl_->peers.clear();
  for (auto& [id, peer] : peers) peer->close();
}

std::uint16_t Host::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace planecast
