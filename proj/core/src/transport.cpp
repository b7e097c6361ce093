// SPDX-License-Identifier: Apache-2.0
#include "rehab/sim/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "rehab/error.hpp"

namespace rehab::sim {

namespace {

struct PipeState {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> queue[2];  // queue[i] is read by end i
  bool closed = false;
};

class PipeEnd final : public Transport {
 public:
  PipeEnd(std::shared_ptr<PipeState> state, int side) : state_(std::move(state)), side_(side) {}
  ~PipeEnd() override { close(); }

  void write(proto::ByteView bytes) override {
    std::lock_guard lock(state_->mu);
    if (state_->closed) throw Error(ErrorCode::TransportClosed, "pipe closed");
    auto& q = state_->queue[1 - side_];
    q.insert(q.end(), bytes.begin(), bytes.end());
    state_->cv.notify_all();
  }

  proto::Bytes read(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(state_->mu);
    auto& q = state_->queue[side_];
    state_->cv.wait_for(lock, timeout, [&] { return !q.empty() || state_->closed; });
    if (q.empty() && state_->closed) throw Error(ErrorCode::TransportClosed, "pipe closed");
    proto::Bytes out(q.begin(), q.end());
    q.clear();
    return out;
  }

  void close() override {
    std::lock_guard lock(state_->mu);
    state_->closed = true;
    state_->cv.notify_all();
  }

  bool is_open() const override {
    std::lock_guard lock(state_->mu);
    return !state_->closed;
  }

 private:
  std::shared_ptr<PipeState> state_;
  int side_;
};

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpTransport() override {
    close();
    ::close(fd_);
  }

  void write(proto::ByteView bytes) override {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      if (closed_) throw Error(ErrorCode::TransportClosed, "socket closed");
      const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        closed_ = true;
        throw Error(ErrorCode::TransportClosed, std::string("send: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  proto::Bytes read(std::chrono::milliseconds timeout) override {
    if (closed_) throw Error(ErrorCode::TransportClosed, "socket closed");
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0) {
      if (errno == EINTR) return {};
      closed_ = true;
      throw Error(ErrorCode::TransportClosed, std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) return {};
    proto::Bytes buf(4096);
    const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) return {};
      closed_ = true;
      throw Error(ErrorCode::TransportClosed, "peer closed connection");
    }
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }

  void close() override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

  bool is_open() const override { return !closed_; }

 private:
  int fd_;
  std::atomic<bool> closed_{false};
};

sockaddr_in resolve(const Endpoint& endpoint) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(endpoint.port);
  const std::string host = endpoint.host.empty() ? "0.0.0.0" : endpoint.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "cannot resolve host " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe() {
  auto state = std::make_shared<PipeState>();
  return {std::make_unique<PipeEnd>(state, 0), std::make_unique<PipeEnd>(state, 1)};
}

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "address must be host:port, got " + std::string(text));
  }
  Endpoint ep;
  if (colon > 0) ep.host = std::string(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in " + std::string(text));
  }
  return ep;
}

std::unique_ptr<Transport> tcp_connect(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  const auto addr = resolve(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::TransportClosed, std::string("socket: ") + std::strerror(errno));

  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (rc < 0 && errno == EINPROGRESS) {
    pollfd p{fd, POLLOUT, 0};
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    int err = 0;
    socklen_t len = sizeof(err);
    if (rc == 1) ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    rc = (rc == 1 && err == 0) ? 0 : -1;
    if (rc < 0 && err != 0) errno = err;
  }
  if (rc < 0) {
    const std::string why = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::TransportClosed, "connect " + endpoint.host + ":" +
                                                std::to_string(endpoint.port) + ": " + why);
  }
  ::fcntl(fd, F_SETFL, flags);
  return std::make_unique<TcpTransport>(fd);
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  const auto addr = resolve(endpoint);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(fd_, 4) < 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    throw Error(ErrorCode::Io, "listen on port " + std::to_string(endpoint.port) + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeout.count())) != 1) return nullptr;
  const int client = ::accept(fd_, nullptr, nullptr);
  if (client < 0) return nullptr;
  return std::make_unique<TcpTransport>(client);
}

}  // namespace rehab::sim
