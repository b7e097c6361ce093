// SPDX-License-Identifier: Apache-2.0
#include "rehab/sim/clock.hpp"

#include <string>
#include <thread>

#include "rehab/error.hpp"

namespace rehab::sim {

RealClock::RealClock(double factor) : factor_(factor), epoch_(std::chrono::steady_clock::now()) {
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "clock factor must be positive");
}

std::int64_t RealClock::now_us() {
  const auto elapsed = std::chrono::duration<double, std::micro>(
      std::chrono::steady_clock::now() - epoch_);
  return static_cast<std::int64_t>(elapsed.count() * factor_);
}

void RealClock::sleep_until_us(std::int64_t t_us) {
  const auto wall = std::chrono::duration<double, std::micro>(static_cast<double>(t_us) / factor_);
  std::this_thread::sleep_until(epoch_ + std::chrono::duration_cast<std::chrono::nanoseconds>(wall));
}

std::unique_ptr<Clock> make_clock(std::string_view spec) {
  if (spec == "real") return std::make_unique<RealClock>(1.0);
  if (spec == "virtual") return std::make_unique<VirtualClock>();
  if (spec.size() > 1 && spec.front() == 'x') {
    // from_chars for double is unavailable on older libstdc++.
    const std::string digits(spec.substr(1));
    std::size_t used = 0;
    double factor = 0.0;
    try {
      factor = std::stod(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == digits.size() && factor > 0.0) return std::make_unique<RealClock>(factor);
  }
  throw Error(ErrorCode::InvalidArgument, "clock must be real, virtual or x<factor>, got " +
                                              std::string(spec));
}

}  // namespace rehab::sim
