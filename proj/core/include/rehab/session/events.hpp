// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "rehab/emg/gesture.hpp"

namespace rehab::session {

// Vibration strengths understood by the armband.
enum class VibrationKind : std::uint8_t { Short = 1, Medium = 2, Long = 3 };

namespace ev {

struct SyncDetected {
  bool operator==(const SyncDetected&) const = default;
};
struct VibrateRequested {
  VibrationKind kind = VibrationKind::Medium;
  bool operator==(const VibrateRequested&) const = default;
};
/// Zero-based exercise/set/rep position being requested.
struct Prompt {
  int exercise = 0;
  emg::GestureLabel target = emg::GestureLabel::Fist;
  int set = 0;
  int rep = 0;
  bool operator==(const Prompt&) const = default;
};
struct CorrectMovement {
  bool operator==(const CorrectMovement&) const = default;
};
struct IncorrectMovement {
  emg::GestureLabel observed = emg::GestureLabel::Unknown;
  bool operator==(const IncorrectMovement&) const = default;
};
/// Reps completed so far in the current set (1-based).
struct RepCounted {
  int rep = 0;
  bool operator==(const RepCounted&) const = default;
};
/// Sets completed so far in the current exercise (1-based).
struct SetCompleted {
  int set = 0;
  bool operator==(const SetCompleted&) const = default;
};
/// Zero-based index of the finished exercise.
struct ExerciseCompleted {
  int exercise = 0;
  bool operator==(const ExerciseCompleted&) const = default;
};
struct SessionCompleted {
  bool operator==(const SessionCompleted&) const = default;
};

}  // namespace ev

using EventPayload =
    std::variant<ev::SyncDetected, ev::VibrateRequested, ev::Prompt, ev::CorrectMovement,
                 ev::IncorrectMovement, ev::RepCounted, ev::SetCompleted,
                 ev::ExerciseCompleted, ev::SessionCompleted>;

struct FeedbackEvent {
  std::int64_t t_us = 0;
  EventPayload payload;

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(payload);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(payload);
  }

  bool operator==(const FeedbackEvent&) const = default;
};

/// snake_case kind tag used on the wire and in logs, e.g. "rep_counted".
std::string_view kind_name(const EventPayload& payload);

/// UI cue tag ("correct", "incorrect", "complete") or empty when the event has none.
std::string_view cue_name(const EventPayload& payload);

/// `detail` object for the wire/log JSON form. Includes the cue when present.
nlohmann::json event_detail(const EventPayload& payload);

/// Inverse of kind_name + event_detail. Throws CorruptDatabase on unknown kinds or
/// missing fields.
EventPayload parse_event(std::string_view kind, const nlohmann::json& detail);

}  // namespace rehab::session
