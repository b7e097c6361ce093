// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "rehab/protocol/codec.hpp"

namespace rehab::sim {

/// Bidirectional byte stream carrying framed messages. One owner per end; an end may be
/// moved to another thread, but a single end is not shared between threads except for
/// close(), which is safe to call concurrently.
class Transport {
 public:
  virtual ~Transport() = default;

  /// Throws TransportClosed.
  virtual void write(proto::ByteView bytes) = 0;

  /// Waits up to `timeout` for data and returns whatever arrived (possibly nothing).
  /// Throws TransportClosed once the peer or this end closed and no data remains.
  virtual proto::Bytes read(std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
  virtual bool is_open() const = 0;
};

/// Connected in-process pair. Closing either end closes both.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe();

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port" or ":port". Throws InvalidArgument.
Endpoint parse_endpoint(std::string_view text);

/// Throws TransportClosed when the connection cannot be made.
std::unique_ptr<Transport> tcp_connect(const Endpoint& endpoint,
                                       std::chrono::milliseconds timeout = std::chrono::seconds(2));

class TcpListener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port. Throws Io.
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  /// Blocks until a client connects or `timeout` passes (nullptr on timeout).
  std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace rehab::sim
