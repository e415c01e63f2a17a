#include "oow/server.hpp"

#include "oow/error.hpp"
#include "oow/gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cstdlib>
#include <deque>
#include <functional>
#include <memory>
#include <optional>

namespace oow::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::uint16_t default_port() {
  if (const char* env = std::getenv("OOW_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) return static_cast<std::uint16_t>(v);
  }
  return 8765;
}

namespace {

using Socket = websocket::stream<tcp::socket>;

/// Outgoing text frames, one async_write in flight at a time.
class Writer : public std::enable_shared_from_this<Writer> {
 public:
  explicit Writer(std::shared_ptr<Socket> ws) : ws_(std::move(ws)) {}

  void send(std::string msg) {
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) pump();
  }

  /// Close once everything queued has been written.
  void close_after_flush() {
    closing_ = true;
    if (queue_.empty()) do_close();
  }

  bool idle() const { return queue_.empty(); }
  void on_closed(std::function<void()> fn) { on_closed_ = std::move(fn); }

 private:
  void pump() {
    ws_->text(true);
    ws_->async_write(asio::buffer(queue_.front()),
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->queue_.pop_front();
                       if (ec) {
                         self->queue_.clear();
                         if (self->closing_) self->do_close();
                         return;
                       }
                       if (!self->queue_.empty()) {
                         self->pump();
                       } else if (self->closing_) {
                         self->do_close();
                       }
                     });
  }

  void do_close() {
    if (closed_) return;
    closed_ = true;
    ws_->async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {
      if (self->on_closed_) self->on_closed_();
    });
  }

  std::shared_ptr<Socket> ws_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closed_ = false;
  std::function<void()> on_closed_;
};

class Session {
 public:
  Session(asio::io_context& io, const Scenario& scenario, const mission::TrialConfig& config,
          const ServeOptions& options)
      : io_(io),
        acceptor_(io),
        timer_(io),
        scenario_(scenario),
        config_(config),
        options_(options) {
    tcp::endpoint ep(asio::ip::make_address(options.address), options.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    if (options_.on_listening) options_.on_listening(acceptor_.local_endpoint().port());
    accept();
  }

  telemetry::SessionLog result() const {
    return engine_ ? engine_->log() : telemetry::SessionLog{};
  }

 private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      auto ws = std::make_shared<Socket>(std::move(sock));
      ws->async_accept([this, ws](beast::error_code hec) {
        if (hec) return;
        if (operator_) {
          refuse(ws);
        } else {
          begin(ws);
        }
      });
      if (!done_) accept();
    });
  }

  void refuse(const std::shared_ptr<Socket>& ws) {
    auto w = std::make_shared<Writer>(ws);
    w->send(error_message("session busy: another operator is connected"));
    w->close_after_flush();
  }

  void begin(const std::shared_ptr<Socket>& ws) {
    operator_ = ws;
    writer_ = std::make_shared<Writer>(ws);
    engine_.emplace(scenario_, config_, options_.log_sink);
    clock0_ = std::chrono::steady_clock::now();
    flush_events();
    writer_->send(state_message(engine_->snapshot()));
    read();
    schedule();
  }

  void read() {
    operator_->async_read(buffer_, [this](beast::error_code ec, std::size_t) {
      if (done_) return;
      if (ec) {
        engine_->end("disconnect");
        flush_events();
        finish();
        return;
      }
      const std::string text = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      try {
        control::InputCommand cmd = parse_input_message(text);
        const double now = engine_->time();
        if (!ts_offset_) ts_offset_ = now - cmd.timestamp;
        cmd.timestamp = std::min(cmd.timestamp + *ts_offset_, now);
        pending_.push_back(cmd);
      } catch (const Error& e) {
        writer_->send(error_message(e.what()));
      }
      read();
    });
  }

  void schedule() {
    const auto period = std::chrono::duration<double>(engine_->dt());
    timer_.expires_at(clock0_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    period * static_cast<double>(engine_->tick() + 1)));
    timer_.async_wait([this](beast::error_code ec) {
      if (ec || done_) return;
      tick();
    });
  }

  void tick() {
    for (const auto& cmd : pending_) {
      try {
        engine_->submit(cmd);
      } catch (const OrderingError& e) {
        writer_->send(error_message(e.what()));
      }
    }
    pending_.clear();
    if (options_.max_time > 0.0 && engine_->time() >= options_.max_time) engine_->end("max_time");
    engine_->step();
    flush_events();
    if (engine_->finished()) {
      writer_->send(state_message(engine_->snapshot()));
      finish();
      return;
    }
    if (engine_->tick() % scenario_.broadcast_every == 0) {
      writer_->send(state_message(engine_->snapshot()));
    }
    schedule();
  }

  void flush_events() {
    for (const auto& e : engine_->events_since(sent_events_)) {
      if (!std::holds_alternative<telemetry::Input>(e.payload)) writer_->send(event_message(e));
    }
    sent_events_ = engine_->log().events().size();
  }

  void finish() {
    done_ = true;
    timer_.cancel();
    beast::error_code ignored;
    acceptor_.close(ignored);
    writer_->on_closed([this] { io_.stop(); });
    writer_->close_after_flush();
    // Give the close handshake a moment, then stop regardless.
    auto guard = std::make_shared<asio::steady_timer>(io_, std::chrono::seconds(2));
    guard->async_wait([this, guard](beast::error_code) { io_.stop(); });
  }

  asio::io_context& io_;
  tcp::acceptor acceptor_;
  asio::steady_timer timer_;
  const Scenario& scenario_;
  mission::TrialConfig config_;
  ServeOptions options_;

  std::shared_ptr<Socket> operator_;
  std::shared_ptr<Writer> writer_;
  beast::flat_buffer buffer_;
  std::optional<Engine> engine_;
  std::chrono::steady_clock::time_point clock0_;
  std::optional<double> ts_offset_;
  std::vector<control::InputCommand> pending_;
  std::size_t sent_events_ = 0;
  bool done_ = false;
};

}  // namespace

telemetry::SessionLog serve(const Scenario& scenario, const mission::TrialConfig& config,
                            const ServeOptions& options) {
  asio::io_context io;
  Session session(io, scenario, config, options);
  io.run();
  return session.result();
}

}  // namespace oow::gateway
