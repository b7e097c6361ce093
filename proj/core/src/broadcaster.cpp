// SPDX-License-Identifier: Apache-2.0
#include "rehab/service/broadcaster.hpp"

namespace rehab::service {

nlohmann::json wire_to_json(const WireEvent& e) {
  return nlohmann::json{{"seq", e.seq}, {"t_us", e.t_us}, {"kind", e.kind}, {"detail", e.detail}};
}

std::string to_sse(const WireEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + wire_to_json(e).dump() +
         "\n\n";
}

std::uint64_t Broadcaster::publish(std::int64_t t_us, std::string kind, nlohmann::json detail) {
  std::lock_guard lock(mu_);
  const std::uint64_t seq = history_.size() + 1;
  history_.push_back(WireEvent{seq, t_us, std::move(kind), std::move(detail)});
  cv_.notify_all();
  return seq;
}

std::vector<WireEvent> Broadcaster::since(std::uint64_t last_seq) const {
  std::lock_guard lock(mu_);
  if (last_seq >= history_.size()) return {};
  return {history_.begin() + static_cast<std::ptrdiff_t>(last_seq), history_.end()};
}

std::vector<WireEvent> Broadcaster::wait_since(std::uint64_t last_seq,
                                               std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || history_.size() > last_seq; });
  if (last_seq >= history_.size()) return {};
  return {history_.begin() + static_cast<std::ptrdiff_t>(last_seq), history_.end()};
}

std::uint64_t Broadcaster::last_seq() const {
  std::lock_guard lock(mu_);
  return history_.size();
}

void Broadcaster::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

bool Broadcaster::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace rehab::service
