#pragma once

#include <string>
#include <string_view>

namespace dynum::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};

/// Parses "host:port"; throws ConfigError on malformed input.
Endpoint parse_endpoint(const std::string& text);

/// One buffered TCP byte stream carrying newline-delimited records.
class TcpConn {
 public:
  TcpConn() = default;
  explicit TcpConn(int fd) : fd_(fd) {}
  ~TcpConn() { close(); }
  TcpConn(const TcpConn&) = delete;
  TcpConn& operator=(const TcpConn&) = delete;
  TcpConn(TcpConn&& o) noexcept;
  TcpConn& operator=(TcpConn&& o) noexcept;

  /// Blocking connect; returns an invalid connection on failure.
  static TcpConn connect(const Endpoint& ep);

  bool valid() const { return fd_ >= 0; }
  void close();

  /// Writes one record (caller includes the trailing newline).
  /// Returns false on a broken connection.
  bool send_line(std::string_view line);

  /// Reads one '\n'-terminated record (newline stripped). Returns false on
  /// EOF, error or timeout.
  bool recv_line(std::string& out, int timeout_ms);

 private:
  int fd_ = -1;
  std::string buffer_;
};

class TcpListener {
 public:
  TcpListener() = default;
  ~TcpListener() { close(); }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  /// Binds and listens; port 0 picks an ephemeral port. Throws ConfigError.
  void listen(const Endpoint& ep);
  int port() const { return port_; }

  /// Accepts one connection; blocks up to timeout_ms (-1 = forever).
  /// Returns an invalid connection on timeout.
  TcpConn accept(int timeout_ms);

  void close();

 private:
  int fd_ = -1;
  int port_ = 0;
};

}  // namespace dynum::net
