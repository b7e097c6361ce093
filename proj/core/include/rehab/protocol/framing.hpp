// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "rehab/protocol/codec.hpp"

namespace rehab::proto {

inline constexpr std::size_t kMaxFramePayload = 65533;

/// One notification on the stream transport: [len u16 LE][attribute u16 LE][payload],
/// where len = 2 + payload size.
struct FramedMessage {
  std::uint16_t attribute_id = 0;
  Bytes payload;
  bool operator==(const FramedMessage&) const = default;
};

/// Throws MalformedFrame if the payload exceeds 65533 bytes.
Bytes frame_write(std::uint16_t attribute_id, ByteView payload);
inline Bytes frame_write(Attribute attribute, ByteView payload) {
  return frame_write(static_cast<std::uint16_t>(attribute), payload);
}

/// Per-connection reassembly buffer. Bytes of an incomplete trailing frame stay pending
/// until the next feed.
class FrameReader {
 public:
  /// Returns every complete message now available, in order. Throws MalformedFrame when a
  /// header declares len < 2; the reader is then unusable until reset().
  std::vector<FramedMessage> feed(ByteView chunk);

  std::size_t pending_bytes() const noexcept { return buffer_.size() - offset_; }
  /// True when a partial frame is buffered.
  bool needs_more_data() const noexcept { return pending_bytes() > 0; }
  void reset() noexcept;

 private:
  Bytes buffer_;
  std::size_t offset_ = 0;
  bool poisoned_ = false;
};

/// Free-function spelling of FrameReader::feed.
std::vector<FramedMessage> frame_read(FrameReader& reader, ByteView chunk);

}  // namespace rehab::proto
