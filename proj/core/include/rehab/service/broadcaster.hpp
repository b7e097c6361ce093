// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace rehab::service {

struct WireEvent {
  std::uint64_t seq = 0;
  std::int64_t t_us = 0;
  std::string kind;
  nlohmann::json detail;

  bool operator==(const WireEvent&) const = default;
};

/// {seq, t_us, kind, detail}
nlohmann::json wire_to_json(const WireEvent& e);

/// text/event-stream record: "id: <seq>\nevent: <kind>\ndata: <json>\n\n".
std::string to_sse(const WireEvent& e);

/// Sequenced event history with blocking reads. Sequence numbers start at 1 and have no
/// gaps, so a subscriber resumes by asking for everything after its last seen number.
class Broadcaster {
 public:
  std::uint64_t publish(std::int64_t t_us, std::string kind, nlohmann::json detail);

  std::vector<WireEvent> since(std::uint64_t last_seq) const;

  /// Waits up to `timeout` for events newer than `last_seq`; returns empty on timeout or
  /// after close().
  std::vector<WireEvent> wait_since(std::uint64_t last_seq, std::chrono::milliseconds timeout) const;

  std::uint64_t last_seq() const;
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<WireEvent> history_;
  bool closed_ = false;
};

}  // namespace rehab::service
