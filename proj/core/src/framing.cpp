// SPDX-License-Identifier: Apache-2.0
#include "rehab/protocol/framing.hpp"

#include <string>

#include "rehab/error.hpp"

namespace rehab::proto {

Bytes frame_write(std::uint16_t attribute_id, ByteView payload) {
  if (payload.size() > kMaxFramePayload) {
    throw Error(ErrorCode::MalformedFrame,
                "payload of " + std::to_string(payload.size()) + " bytes exceeds frame limit");
  }
  const auto len = static_cast<std::uint16_t>(payload.size() + 2);
  Bytes out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<std::uint8_t>(len & 0xFF));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(attribute_id & 0xFF));
  out.push_back(static_cast<std::uint8_t>(attribute_id >> 8));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<FramedMessage> FrameReader::feed(ByteView chunk) {
  if (poisoned_) throw Error(ErrorCode::MalformedFrame, "reader poisoned by earlier bad frame");
  buffer_.insert(buffer_.end(), chunk.begin(), chunk.end());

  std::vector<FramedMessage> out;
  while (buffer_.size() - offset_ >= 2) {
    const std::size_t len = buffer_[offset_] | (buffer_[offset_ + 1] << 8);
    if (len < 2) {
      poisoned_ = true;
      throw Error(ErrorCode::MalformedFrame, "declared length " + std::to_string(len) + " < 2");
    }
    if (buffer_.size() - offset_ < 2 + len) break;  // wait for the rest
    FramedMessage m;
    m.attribute_id = static_cast<std::uint16_t>(buffer_[offset_ + 2] | (buffer_[offset_ + 3] << 8));
    const auto first = buffer_.begin() + static_cast<std::ptrdiff_t>(offset_ + 4);
    m.payload.assign(first, first + static_cast<std::ptrdiff_t>(len - 2));
    out.push_back(std::move(m));
    offset_ += 2 + len;
  }
  // Compact once the consumed prefix dominates.
  if (offset_ > 0 && offset_ * 2 >= buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return out;
}

void FrameReader::reset() noexcept {
  buffer_.clear();
  offset_ = 0;
  poisoned_ = false;
}

std::vector<FramedMessage> frame_read(FrameReader& reader, ByteView chunk) {
  return reader.feed(chunk);
}

}  // namespace rehab::proto
