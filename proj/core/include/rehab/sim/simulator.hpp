// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "rehab/emg/features.hpp"
#include "rehab/error.hpp"
#include "rehab/protocol/codec.hpp"
#include "rehab/protocol/framing.hpp"
#include "rehab/sim/clock.hpp"
#include "rehab/sim/script.hpp"
#include "rehab/sim/transport.hpp"

namespace rehab::sim {

using ChannelGains = std::array<double, emg::kChannels>;

/// Amplitude-modulated Gaussian noise model of the eight electrode channels.
struct EmgSynthModel {
  double baseline_amp = 2.0;   // counts of jitter present at all times
  double amplitude = 40.0;     // contraction amplitude A, counts
  double noise_std = 1.0;
  std::int64_t ramp_ms = 100;  // linear cross-fade at gesture boundaries
  std::uint64_t seed = 1;
  std::map<emg::GestureLabel, ChannelGains> gain;

  /// Rest silent; Fist on channels 0-3, FingersSpread on 4-7, WaveOut on 5-7, WaveIn on 1-3.
  static EmgSynthModel default_model(std::uint64_t seed = 1);

  /// Throws InvalidArgument when a profile invariant is broken.
  void validate() const;

  const ChannelGains& gains(emg::GestureLabel label) const;
};

using Rng = std::mt19937_64;

/// One sample: clamp(round(g*A*n + baseline*m)) with n, m ~ N(0, noise_std).
std::int8_t synth_sample(const EmgSynthModel& model, emg::GestureLabel label, int channel, Rng& rng);
std::int8_t synth_sample_with_gain(const EmgSynthModel& model, double gain, Rng& rng);

struct SimStatus {
  bool connected = false;
  bool synced = false;  // set once the host acknowledges sync with a vibration
  bool asleep = false;
  std::vector<std::pair<std::int64_t, std::uint8_t>> vibrations;  // (t_ms, kind)
  proto::SetMode mode;
  std::uint64_t emg_packets = 0;
  std::uint64_t imu_packets = 0;
  std::uint64_t rejected_commands = 0;

  bool operator==(const SimStatus&) const = default;
};

inline constexpr std::int64_t kEmgPacketIntervalUs = 10'000;  // 100 packets/s, 2 frames each
inline constexpr std::int64_t kImuPacketIntervalUs = 20'000;  // 50 Hz

/// Deterministic synthetic armband, advanced explicitly in time. Notifications are
/// produced as framed bytes ready for a transport.
class DeviceSimulator {
 public:
  DeviceSimulator(GestureScript script, EmgSynthModel model, proto::SetMode initial_mode = {});

  /// Applies host->device framed bytes received at `now_us`. Malformed commands are counted
  /// in status().rejected_commands and otherwise ignored.
  void receive(proto::ByteView framed, std::int64_t now_us);
  void apply(const proto::Command& cmd, std::int64_t now_us);

  /// Emits every notification scheduled at times <= until_us (exclusive of total_ms).
  proto::Bytes advance_to(std::int64_t until_us);

  ChannelGains gains_at(std::int64_t t_us) const;

  std::int64_t now_us() const noexcept { return now_us_; }
  std::int64_t end_us() const noexcept { return script_.total_ms * 1000; }
  bool finished() const noexcept { return next_tick_us_ >= end_us(); }
  const SimStatus& status() const noexcept { return status_; }
  SimStatus& status() noexcept { return status_; }
  const GestureScript& script() const noexcept { return script_; }

 private:
  GestureScript script_;
  EmgSynthModel model_;
  Rng rng_;
  proto::FrameReader inbound_;
  SimStatus status_;
  std::int64_t now_us_ = 0;
  std::int64_t next_tick_us_ = 0;
  std::vector<std::int64_t> boundaries_us_;
};

/// Thrown by run_script when the transport closes early; carries the status so far.
class SimulationAborted : public Error {
 public:
  SimulationAborted(const std::string& message, SimStatus status)
      : Error(ErrorCode::TransportClosed, message), status_(std::move(status)) {}
  const SimStatus& status() const noexcept { return status_; }

 private:
  SimStatus status_;
};

struct RunOptions {
  proto::SetMode initial_mode{proto::emg_mode::kRaw, proto::imu_mode::kData, 0};
  /// Keep honoring commands for this long after the script ends.
  std::int64_t linger_us = 0;
  /// After the script ends, keep applying inbound commands until the transport closes,
  /// then return normally.
  bool linger_until_closed = false;
};

/// Plays `script` over `transport`, pacing with `clock` at the EMG packet interval and
/// servicing inbound commands between packets. Throws SimulationAborted.
SimStatus run_script(const GestureScript& script, const EmgSynthModel& model, Transport& transport,
                     Clock& clock, const RunOptions& options = {});

}  // namespace rehab::sim
