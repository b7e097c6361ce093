// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "rehab/emg/features.hpp"

// Byte layouts for the armband control and data characteristics. All multi-byte fields
// are little-endian. See docs/protocol.md for the tables.
namespace rehab::proto {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Logical attribute ids carried in the stream framing.
enum class Attribute : std::uint16_t {
  Command = 1,
  Emg = 2,
  Imu = 3,
  ClassifierEvent = 4,
};

namespace opcode {
inline constexpr std::uint8_t kSetMode = 0x01;
inline constexpr std::uint8_t kVibrate = 0x03;
inline constexpr std::uint8_t kDeepSleep = 0x04;
}  // namespace opcode

namespace emg_mode {
inline constexpr std::uint8_t kNone = 0x00;
inline constexpr std::uint8_t kFiltered = 0x02;
inline constexpr std::uint8_t kRaw = 0x03;
}  // namespace emg_mode

namespace imu_mode {
inline constexpr std::uint8_t kNone = 0x00;
inline constexpr std::uint8_t kData = 0x01;
inline constexpr std::uint8_t kEvents = 0x03;
inline constexpr std::uint8_t kAll = 0x04;
inline constexpr std::uint8_t kRawData = 0x05;
}  // namespace imu_mode

struct SetMode {
  std::uint8_t emg_mode = emg_mode::kNone;
  std::uint8_t imu_mode = imu_mode::kNone;
  std::uint8_t classifier_mode = 0;
  bool operator==(const SetMode&) const = default;
};

struct Vibrate {
  std::uint8_t kind = 1;
  bool operator==(const Vibrate&) const = default;
};

struct DeepSleep {
  bool operator==(const DeepSleep&) const = default;
};

using Command = std::variant<SetMode, Vibrate, DeepSleep>;

bool valid_emg_mode(std::uint8_t m) noexcept;
bool valid_imu_mode(std::uint8_t m) noexcept;
bool emg_streaming(std::uint8_t m) noexcept;
bool imu_streaming(std::uint8_t m) noexcept;

/// SetMode -> 01 03 emg imu cls; Vibrate -> 03 01 kind; DeepSleep -> 04 00.
/// Throws InvalidCommand for out-of-range fields.
Bytes encode_command(const Command& cmd);

/// Total over all inputs: returns a Command or throws UnknownCommand / MalformedPacket.
Command decode_command(ByteView bytes);

inline constexpr std::size_t kEmgPacketSize = 16;
inline constexpr std::size_t kImuPacketSize = 20;
inline constexpr std::int64_t kEmgFramePeriodUs = 1'000'000 / emg::kDefaultSampleRateHz;

/// Two consecutive 8-channel samples.
struct EmgDataPacket {
  std::array<std::array<std::int8_t, emg::kChannels>, 2> samples{};
  bool operator==(const EmgDataPacket&) const = default;
};

Bytes encode_emg_packet(const EmgDataPacket& packet);
EmgDataPacket decode_emg_raw(ByteView bytes);

/// Decodes the sample pair and stamps the frames `first_us` and `first_us + period_us`.
/// Throws MalformedPacket unless exactly 16 bytes.
std::pair<emg::EmgFrame, emg::EmgFrame> decode_emg_packet(ByteView bytes,
                                                          std::int64_t first_us = 0,
                                                          std::int64_t period_us = kEmgFramePeriodUs);

inline constexpr double kQuaternionScale = 16384.0;
inline constexpr double kAccelScale = 2048.0;  // counts per g
inline constexpr double kGyroScale = 16.0;     // counts per deg/s

/// Raw fixed-point IMU words: quaternion w,x,y,z; accel x,y,z; gyro x,y,z.
struct ImuDataPacket {
  std::array<std::int16_t, 4> orientation{};
  std::array<std::int16_t, 3> accel{};
  std::array<std::int16_t, 3> gyro{};
  bool operator==(const ImuDataPacket&) const = default;
};

struct ImuReading {
  std::array<double, 4> orientation{};  // unit quaternion w,x,y,z
  std::array<double, 3> accel_g{};
  std::array<double, 3> gyro_dps{};
  bool operator==(const ImuReading&) const = default;
};

Bytes encode_imu_packet(const ImuDataPacket& packet);
ImuDataPacket decode_imu_raw(ByteView bytes);
ImuReading scale(const ImuDataPacket& raw) noexcept;
/// Throws MalformedPacket unless exactly 20 bytes.
ImuReading decode_imu_packet(ByteView bytes);

/// Device-side classifier notification. Decoded for compatibility; the payload is opaque.
struct ClassifierEventPacket {
  std::uint8_t event_type = 0;
  Bytes payload;
  bool operator==(const ClassifierEventPacket&) const = default;
};

Bytes encode_classifier_event(const ClassifierEventPacket& packet);
ClassifierEventPacket decode_classifier_event(ByteView bytes);

}  // namespace rehab::proto
