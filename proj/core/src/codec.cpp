// SPDX-License-Identifier: Apache-2.0
#include "rehab/protocol/codec.hpp"

#include <string>

#include "rehab/error.hpp"

namespace rehab::proto {

namespace {

void put_i16(Bytes& out, std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  out.push_back(static_cast<std::uint8_t>(u & 0xFF));
  out.push_back(static_cast<std::uint8_t>(u >> 8));
}

std::int16_t get_i16(ByteView b, std::size_t at) {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8)));
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedPacket, what);
}

}  // namespace

bool valid_emg_mode(std::uint8_t m) noexcept {
  return m == emg_mode::kNone || m == emg_mode::kFiltered || m == emg_mode::kRaw;
}

bool valid_imu_mode(std::uint8_t m) noexcept {
  return m == imu_mode::kNone || m == imu_mode::kData || m == imu_mode::kEvents ||
         m == imu_mode::kAll || m == imu_mode::kRawData;
}

bool emg_streaming(std::uint8_t m) noexcept { return m != emg_mode::kNone; }

// Event-only mode sends no data packets.
bool imu_streaming(std::uint8_t m) noexcept {
  return m == imu_mode::kData || m == imu_mode::kAll || m == imu_mode::kRawData;
}

Bytes encode_command(const Command& cmd) {
  if (const auto* m = std::get_if<SetMode>(&cmd)) {
    if (!valid_emg_mode(m->emg_mode) || !valid_imu_mode(m->imu_mode) || m->classifier_mode > 1) {
      throw Error(ErrorCode::InvalidCommand, "SetMode field out of range");
    }
    return {opcode::kSetMode, 0x03, m->emg_mode, m->imu_mode, m->classifier_mode};
  }
  if (const auto* v = std::get_if<Vibrate>(&cmd)) {
    if (v->kind < 1 || v->kind > 3) {
      throw Error(ErrorCode::InvalidCommand, "vibrate kind " + std::to_string(v->kind));
    }
    return {opcode::kVibrate, 0x01, v->kind};
  }
  return {opcode::kDeepSleep, 0x00};
}

Command decode_command(ByteView bytes) {
  if (bytes.empty()) malformed("empty command");
  const std::uint8_t op = bytes[0];
  if (op != opcode::kSetMode && op != opcode::kVibrate && op != opcode::kDeepSleep) {
    throw Error(ErrorCode::UnknownCommand, "opcode " + std::to_string(op));
  }
  if (bytes.size() < 2) malformed("missing payload length");
  const std::size_t declared = bytes[1];
  if (declared != bytes.size() - 2) malformed("declared payload length disagrees with size");
  const auto payload = bytes.subspan(2);

  switch (op) {
    case opcode::kSetMode: {
      if (payload.size() != 3) malformed("SetMode payload must be 3 bytes");
      SetMode m{payload[0], payload[1], payload[2]};
      if (!valid_emg_mode(m.emg_mode) || !valid_imu_mode(m.imu_mode) || m.classifier_mode > 1) {
        malformed("SetMode field out of range");
      }
      return m;
    }
    case opcode::kVibrate: {
      if (payload.size() != 1) malformed("Vibrate payload must be 1 byte");
      if (payload[0] < 1 || payload[0] > 3) malformed("vibrate kind out of range");
      return Vibrate{payload[0]};
    }
    default:
      if (!payload.empty()) malformed("DeepSleep takes no payload");
      return DeepSleep{};
  }
}

Bytes encode_emg_packet(const EmgDataPacket& packet) {
  Bytes out;
  out.reserve(kEmgPacketSize);
  for (const auto& sample : packet.samples) {
    for (auto v : sample) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

EmgDataPacket decode_emg_raw(ByteView bytes) {
  if (bytes.size() != kEmgPacketSize) {
    malformed("EMG packet is " + std::to_string(bytes.size()) + " bytes, expected 16");
  }
  EmgDataPacket p;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t ch = 0; ch < static_cast<std::size_t>(emg::kChannels); ++ch) {
      p.samples[s][ch] = static_cast<std::int8_t>(bytes[s * emg::kChannels + ch]);
    }
  }
  return p;
}

std::pair<emg::EmgFrame, emg::EmgFrame> decode_emg_packet(ByteView bytes, std::int64_t first_us,
                                                          std::int64_t period_us) {
  const auto raw = decode_emg_raw(bytes);
  emg::EmgFrame a{first_us, raw.samples[0]};
  emg::EmgFrame b{first_us + period_us, raw.samples[1]};
  return {a, b};
}

Bytes encode_imu_packet(const ImuDataPacket& packet) {
  Bytes out;
  out.reserve(kImuPacketSize);
  for (auto v : packet.orientation) put_i16(out, v);
  for (auto v : packet.accel) put_i16(out, v);
  for (auto v : packet.gyro) put_i16(out, v);
  return out;
}

ImuDataPacket decode_imu_raw(ByteView bytes) {
  if (bytes.size() != kImuPacketSize) {
    malformed("IMU packet is " + std::to_string(bytes.size()) + " bytes, expected 20");
  }
  ImuDataPacket p;
  std::size_t at = 0;
  for (auto& v : p.orientation) { v = get_i16(bytes, at); at += 2; }
  for (auto& v : p.accel) { v = get_i16(bytes, at); at += 2; }
  for (auto& v : p.gyro) { v = get_i16(bytes, at); at += 2; }
  return p;
}

ImuReading scale(const ImuDataPacket& raw) noexcept {
  ImuReading r;
  for (std::size_t i = 0; i < 4; ++i) r.orientation[i] = raw.orientation[i] / kQuaternionScale;
  for (std::size_t i = 0; i < 3; ++i) {
    r.accel_g[i] = raw.accel[i] / kAccelScale;
    r.gyro_dps[i] = raw.gyro[i] / kGyroScale;
  }
  return r;
}

ImuReading decode_imu_packet(ByteView bytes) { return scale(decode_imu_raw(bytes)); }

Bytes encode_classifier_event(const ClassifierEventPacket& packet) {
  Bytes out;
  out.reserve(1 + packet.payload.size());
  out.push_back(packet.event_type);
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

ClassifierEventPacket decode_classifier_event(ByteView bytes) {
  if (bytes.empty()) malformed("empty classifier event");
  return ClassifierEventPacket{bytes[0], Bytes(bytes.begin() + 1, bytes.end())};
}

}  // namespace rehab::proto
