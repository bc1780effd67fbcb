#ifndef FIBQKD_WIRE_SOCKET_HPP
#define FIBQKD_WIRE_SOCKET_HPP

#include <cerrno>
#include <cstring>
#include <memory>
#include <string>
#include <utility>

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "fibqkd/errors.hpp"
#include "fibqkd/wire/transport.hpp"

namespace fibqkd::wire {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "host:port"; the host part may be empty (any address).
inline Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw ConfigError("endpoint must be host:port, got '" + s + "'");
  Endpoint ep;
  ep.host = s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  try {
    std::size_t used = 0;
    const unsigned long p = std::stoul(port, &used);
    if (used != port.size() || p > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ConfigError("invalid port in endpoint '" + s + "'");
  }
  return ep;
}

class FileDescriptor {
public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) noexcept : fd_(fd) {}
  FileDescriptor(FileDescriptor&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  FileDescriptor& operator=(FileDescriptor&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

inline std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class TcpTransport final : public Transport {
public:
  explicit TcpTransport(FileDescriptor fd) : fd_(std::move(fd)) {
    int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  static std::unique_ptr<TcpTransport> connect(const Endpoint& ep, std::chrono::milliseconds retry_for = {}) {
    const auto deadline = std::chrono::steady_clock::now() + retry_for;
    for (;;) {
      addrinfo hints{};
      hints.ai_family = AF_UNSPEC;
      hints.ai_socktype = SOCK_STREAM;
      addrinfo* res = nullptr;
      const std::string host = ep.host.empty() ? "127.0.0.1" : ep.host;
      if (int rc = ::getaddrinfo(host.c_str(), std::to_string(ep.port).c_str(), &hints, &res); rc != 0)
        throw TransportError(std::string("resolve ") + host + ": " + ::gai_strerror(rc));
      std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
      for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        FileDescriptor fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!fd) continue;
        if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<TcpTransport>(std::move(fd));
      }
      if (std::chrono::steady_clock::now() >= deadline)
        throw TransportError("connect to " + host + ":" + std::to_string(ep.port) + " failed");
      ::usleep(20000);
    }
  }

  void send(std::span<const std::uint8_t> bytes) override {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd_.get(), bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("send"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::size_t receive(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) override {
    pollfd p{fd_.get(), POLLIN, 0};
    for (;;) {
      const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw TransportError(errno_text("poll"));
      if (rc == 0) throw TimeoutError();
      break;
    }
    for (;;) {
      const ssize_t n = ::recv(fd_.get(), buf.data(), buf.size(), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) {
        if (errno == ECONNRESET) return 0;
        throw TransportError(errno_text("recv"));
      }
      return static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_) ::shutdown(fd_.get(), SHUT_RDWR);
    fd_.reset();
  }

private:
  FileDescriptor fd_;
};

class TcpListener {
public:
  explicit TcpListener(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
    if (int rc = ::getaddrinfo(host, std::to_string(ep.port).c_str(), &hints, &res); rc != 0)
      throw TransportError(std::string("resolve listen address: ") + ::gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      FileDescriptor fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!fd) continue;
      int one = 1;
      ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      if (::bind(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd.get(), 16) == 0) {
        fd_ = std::move(fd);
        break;
      }
    }
    if (!fd_) throw TransportError(errno_text("bind/listen"));
  }

  /// Port actually bound (useful when listening on port 0).
  std::uint16_t port() const {
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    if (::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) throw TransportError(errno_text("getsockname"));
    if (ss.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
    return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
  }

  std::unique_ptr<TcpTransport> accept(std::chrono::milliseconds timeout) {
    pollfd p{fd_.get(), POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc == 0) throw TimeoutError();
    if (rc < 0) throw TransportError(errno_text("poll"));
    FileDescriptor fd(::accept(fd_.get(), nullptr, nullptr));
    if (!fd) throw TransportError(errno_text("accept"));
    return std::make_unique<TcpTransport>(std::move(fd));
  }

private:
  FileDescriptor fd_;
};

} // namespace fibqkd::wire

#endif // FIBQKD_WIRE_SOCKET_HPP
