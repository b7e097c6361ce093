// SPDX-License-Identifier: Apache-2.0
#include "rehab/session/events.hpp"

#include "rehab/error.hpp"

namespace rehab::session {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

emg::GestureLabel gesture_field(const nlohmann::json& detail, const char* key) {
  const auto label = emg::parse_gesture(detail.at(key).get<std::string>());
  if (!label) throw Error(ErrorCode::CorruptDatabase, std::string("bad gesture in ") + key);
  return *label;
}

}  // namespace

std::string_view kind_name(const EventPayload& payload) {
  return std::visit(
      overloaded{
          [](const ev::SyncDetected&) { return std::string_view("sync_detected"); },
          [](const ev::VibrateRequested&) { return std::string_view("vibrate_requested"); },
          [](const ev::Prompt&) { return std::string_view("prompt"); },
          [](const ev::CorrectMovement&) { return std::string_view("correct_movement"); },
          [](const ev::IncorrectMovement&) { return std::string_view("incorrect_movement"); },
          [](const ev::RepCounted&) { return std::string_view("rep_counted"); },
          [](const ev::SetCompleted&) { return std::string_view("set_completed"); },
          [](const ev::ExerciseCompleted&) { return std::string_view("exercise_completed"); },
          [](const ev::SessionCompleted&) { return std::string_view("session_completed"); },
      },
      payload);
}

std::string_view cue_name(const EventPayload& payload) {
  if (std::holds_alternative<ev::CorrectMovement>(payload)) return "correct";
  if (std::holds_alternative<ev::IncorrectMovement>(payload)) return "incorrect";
  if (std::holds_alternative<ev::SessionCompleted>(payload)) return "complete";
  return {};
}

nlohmann::json event_detail(const EventPayload& payload) {
  nlohmann::json d = nlohmann::json::object();
  std::visit(overloaded{
                 [](const ev::SyncDetected&) {},
                 [&](const ev::VibrateRequested& e) { d["kind"] = static_cast<int>(e.kind); },
                 [&](const ev::Prompt& e) {
                   d["exercise"] = e.exercise;
                   d["target"] = emg::to_string(e.target);
                   d["set"] = e.set;
                   d["rep"] = e.rep;
                 },
                 [](const ev::CorrectMovement&) {},
                 [&](const ev::IncorrectMovement& e) {
                   d["observed"] = emg::to_string(e.observed);
                 },
                 [&](const ev::RepCounted& e) { d["rep"] = e.rep; },
                 [&](const ev::SetCompleted& e) { d["set"] = e.set; },
                 [&](const ev::ExerciseCompleted& e) { d["exercise"] = e.exercise; },
                 [](const ev::SessionCompleted&) {},
             },
             payload);
  if (auto cue = cue_name(payload); !cue.empty()) d["cue"] = cue;
  return d;
}

EventPayload parse_event(std::string_view kind, const nlohmann::json& detail) {
  try {
    if (kind == "sync_detected") return ev::SyncDetected{};
    if (kind == "vibrate_requested") {
      const int k = detail.at("kind").get<int>();
      if (k < 1 || k > 3) throw Error(ErrorCode::CorruptDatabase, "bad vibration kind");
      return ev::VibrateRequested{static_cast<VibrationKind>(k)};
    }
    if (kind == "prompt") {
      return ev::Prompt{detail.at("exercise").get<int>(), gesture_field(detail, "target"),
                        detail.at("set").get<int>(), detail.at("rep").get<int>()};
    }
    if (kind == "correct_movement") return ev::CorrectMovement{};
    if (kind == "incorrect_movement") return ev::IncorrectMovement{gesture_field(detail, "observed")};
    if (kind == "rep_counted") return ev::RepCounted{detail.at("rep").get<int>()};
    if (kind == "set_completed") return ev::SetCompleted{detail.at("set").get<int>()};
    if (kind == "exercise_completed") return ev::ExerciseCompleted{detail.at("exercise").get<int>()};
    if (kind == "session_completed") return ev::SessionCompleted{};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptDatabase, std::string("event detail: ") + e.what());
  }
  throw Error(ErrorCode::CorruptDatabase, "unknown event kind " + std::string(kind));
}

}  // namespace rehab::session
