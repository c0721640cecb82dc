#include "pragma/adapter/channel.hpp"

#include "pragma/errors.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace pragma {

namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

// Wait for `events` on fd until deadline. Returns false on timeout.
bool wait_fd(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw TransportError(errno_text("poll"));
  }
}

class FdChannel : public LineChannel {
 public:
  FdChannel(int fd, std::string description) : fd_(fd), description_(std::move(description)) {}
  ~FdChannel() override { close_fd(); }

  void send_line(std::string_view line, std::chrono::milliseconds timeout) override {
    if (line.find('\n') != std::string_view::npos) throw ProtocolError("outgoing message contains a newline");
    std::string data(line);
    data.push_back('\n');
    auto deadline = Clock::now() + timeout;
    std::size_t sent = 0;
    while (sent < data.size()) {
      if (!wait_fd(fd_, POLLOUT, deadline)) throw Timeout("timed out writing to " + description_);
      ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
        throw TransportError(errno_text(("write to " + description_).c_str()));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string receive_line(std::chrono::milliseconds timeout) override {
    auto deadline = Clock::now() + timeout;
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (!wait_fd(fd_, POLLIN, deadline)) throw Timeout("timed out waiting for " + description_);
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
        throw TransportError(errno_text(("read from " + description_).c_str()));
      }
      if (n == 0) throw TransportError(description_ + " closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string describe() const override { return description_; }

 protected:
  void close_fd() {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
  std::string description_;
  std::string buffer_;
};

class SubprocessChannel final : public FdChannel {
 public:
  SubprocessChannel(int fd, pid_t pid, const std::string& command)
      : FdChannel(fd, "scorer process '" + command + "'"), pid_(pid) {}

  ~SubprocessChannel() override {
    // Closing our end delivers EOF to the child; give it a moment to exit.
    close_fd();
    auto deadline = Clock::now() + std::chrono::milliseconds(500);
    while (Clock::now() < deadline) {
      int status = 0;
      pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::unique_ptr<LineChannel> open_subprocess_channel(const std::string& command) {
  if (command.empty()) throw InvalidInput("empty scorer command");
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) throw TransportError(errno_text("socketpair"));
  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw TransportError(errno_text("fork"));
  }
  if (pid == 0) {
    // Only async-signal-safe calls until exec.
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execv("/bin/sh", const_cast<char* const*>(argv));
    ::_exit(127);
  }
  ::close(sv[1]);
  return std::make_unique<SubprocessChannel>(sv[0], pid, command);
}

std::unique_ptr<LineChannel> open_tcp_channel(const std::string& host, std::uint16_t port,
                                              std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  std::string service = std::to_string(port);
  int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found);
  if (rc != 0) throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

  std::string where = "scorer at " + host + ":" + service;
  auto deadline = Clock::now() + timeout;
  std::string last_error = "no addresses";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<FdChannel>(fd, where);
    if (errno == EINPROGRESS) {
      if (!wait_fd(fd, POLLOUT, deadline)) {
        ::close(fd);
        throw Timeout("timed out connecting to " + where);
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err == 0) return std::make_unique<FdChannel>(fd, where);
      last_error = std::strerror(err);
    } else {
      last_error = std::strerror(errno);
    }
    ::close(fd);
  }
  throw TransportError("cannot connect to " + where + ": " + last_error);
}

}  // namespace pragma
