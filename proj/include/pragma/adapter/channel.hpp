#pragma once

// Newline-framed byte channels for the scoring protocol: a child process
// speaking on its stdin/stdout, or a TCP connection.

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace pragma {

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// `line` must not contain '\n'; the terminator is appended.
  virtual void send_line(std::string_view line, std::chrono::milliseconds timeout) = 0;
  /// Throws Timeout if no complete line arrives in time and TransportError
  /// if the peer closes the connection.
  virtual std::string receive_line(std::chrono::milliseconds timeout) = 0;
  virtual std::string describe() const = 0;
};

/// Runs `command` through /bin/sh -c with stdin and stdout joined to a
/// socket pair. stderr is inherited.
std::unique_ptr<LineChannel> open_subprocess_channel(const std::string& command);

std::unique_ptr<LineChannel> open_tcp_channel(const std::string& host, std::uint16_t port,
                                              std::chrono::milliseconds timeout);

}  // namespace pragma
