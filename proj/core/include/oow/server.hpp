#pragma once

#include "oow/engine.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace oow::gateway {

struct ServeOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::ostream* log_sink = nullptr;
  /// Called once the listener is bound, with the actual port.
  std::function<void(std::uint16_t)> on_listening;
  /// Hard stop for sessions without time pressure; 0 disables it.
  double max_time = 0.0;
};

/// Runs one live session over WebSocket and returns its log once the trial
/// ends. The first connection becomes the operator; further connection
/// attempts while it is active receive an error frame and are closed. The
/// engine clock starts when the operator connects and advances in real time
/// on the fixed tick. Input timestamps are rebased onto the engine clock
/// using the first message, so client and server clocks need not agree.
telemetry::SessionLog serve(const Scenario& scenario, const mission::TrialConfig& config,
                            const ServeOptions& options = {});

/// Default port: OOW_PORT when set and valid, else 8765.
std::uint16_t default_port();

}  // namespace oow::gateway
