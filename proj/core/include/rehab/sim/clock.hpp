// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string_view>

namespace rehab::sim {

/// Injectable time source in microseconds since the clock's own epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() = 0;
  virtual void sleep_until_us(std::int64_t t_us) = 0;
};

/// Jumps straight to any requested time; never blocks.
class VirtualClock final : public Clock {
 public:
  std::int64_t now_us() override { return now_; }
  void sleep_until_us(std::int64_t t_us) override {
    if (t_us > now_) now_ = t_us;
  }

 private:
  std::int64_t now_ = 0;
};

/// Wall clock scaled by `factor` (factor 10 runs ten times faster than real time).
class RealClock final : public Clock {
 public:
  explicit RealClock(double factor = 1.0);
  std::int64_t now_us() override;
  void sleep_until_us(std::int64_t t_us) override;

 private:
  double factor_;
  std::chrono::steady_clock::time_point epoch_;
};

/// "real" -> factor 1; "x<factor>" -> accelerated; "virtual" -> VirtualClock.
/// Throws InvalidArgument on anything else.
std::unique_ptr<Clock> make_clock(std::string_view spec);

}  // namespace rehab::sim
