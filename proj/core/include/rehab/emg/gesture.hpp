// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace rehab::emg {

// Enumeration order is the classifier tie-break order.
enum class GestureLabel : std::uint8_t {
  Rest = 0,
  Fist,
  FingersSpread,
  WaveOut,
  WaveIn,
  Unknown,
};

inline constexpr std::array<GestureLabel, 5> kTemplateLabels = {
    GestureLabel::Rest, GestureLabel::Fist, GestureLabel::FingersSpread,
    GestureLabel::WaveOut, GestureLabel::WaveIn};

std::string_view to_string(GestureLabel label) noexcept;

/// Accepts the snake_case wire names ("fingers_spread") and is case-insensitive.
std::optional<GestureLabel> parse_gesture(std::string_view name) noexcept;

constexpr bool is_active_gesture(GestureLabel label) noexcept {
  return label != GestureLabel::Rest && label != GestureLabel::Unknown;
}

}  // namespace rehab::emg
