// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rehab/emg/classifier.hpp"
#include "rehab/session/events.hpp"
#include "rehab/session/plan.hpp"

namespace rehab::session {

enum class Phase : std::uint8_t { AwaitingSync, Prompting, Holding, RepRest, SetRest, Completed };

std::string_view to_string(Phase phase) noexcept;

/// Read-only view of the machine for the UI. Indices are zero-based; *_done counters
/// count completed units.
struct SessionSnapshot {
  Phase phase = Phase::AwaitingSync;
  int exercise_index = 0;
  int exercise_count = 0;
  emg::GestureLabel target = emg::GestureLabel::Fist;
  int set_index = 0;
  int sets = 0;
  int rep_index = 0;
  int reps_per_set = 0;
  int reps_done = 0;       // in the current set
  int sets_done = 0;       // in the current exercise
  int exercises_done = 0;
  int total_reps_done = 0;
  int total_reps = 0;
  std::int64_t held_ms = 0;
  std::int64_t hold_ms = 0;
  double held_fraction = 0.0;
  std::optional<std::int64_t> rest_until_us;
  std::optional<std::int64_t> last_input_us;

  bool operator==(const SessionSnapshot&) const = default;
};

/// JSON with stable snake_case keys; `phase` is one of awaiting_sync, prompting, holding,
/// rep_rest, set_rest, completed.
nlohmann::json snapshot_to_json(const SessionSnapshot& snap);

/// The exercise protocol state machine:
///
///   AwaitingSync --WaveOut >= sync_hold--> Prompting <--> Holding --hold done--> RepRest
///        RepRest/SetRest --timer--> Prompting ... last rep of last set --> Completed
///
/// Inputs must arrive with nondecreasing timestamps. The engine is a plain value: copying
/// it forks the session.
class SessionEngine {
 public:
  /// Throws EmptyPlan / InvalidExercise.
  explicit SessionEngine(ExercisePlan plan);

  std::vector<FeedbackEvent> on_classification(const emg::Classification& c);
  std::vector<FeedbackEvent> tick(std::int64_t now_us);

  SessionSnapshot snapshot() const;
  Phase phase() const noexcept { return phase_; }
  const ExercisePlan& plan() const noexcept { return plan_; }
  bool completed() const noexcept { return phase_ == Phase::Completed; }

  bool operator==(const SessionEngine&) const = default;

 private:
  using Events = std::vector<FeedbackEvent>;

  const ExerciseSpec& current() const { return plan_.exercises[static_cast<std::size_t>(exercise_)]; }
  std::int64_t hold_us() const;
  void check_time(std::int64_t t_us);
  void advance_timers(std::int64_t t_us, Events& out);
  void enter_prompt(std::int64_t t_us, Events& out);
  void on_sync_input(const emg::Classification& c, Events& out);
  void on_prompting_input(const emg::Classification& c, Events& out);
  void on_holding_input(const emg::Classification& c, Events& out);
  /// Returns true when a wrong-gesture run has lasted wrong_ms.
  bool track_wrong(emg::GestureLabel label, std::int64_t t_us);
  void incorrect(emg::GestureLabel observed, std::int64_t t_us, Events& out);
  void complete_rep(std::int64_t t_us, Events& out);

  ExercisePlan plan_;
  Phase phase_ = Phase::AwaitingSync;
  int exercise_ = 0;
  int set_ = 0;
  int rep_ = 0;
  int reps_done_ = 0;
  int sets_done_ = 0;
  int exercises_done_ = 0;
  int total_reps_done_ = 0;

  std::int64_t held_us_ = 0;
  std::int64_t last_target_us_ = 0;
  std::int64_t rest_until_us_ = 0;
  std::optional<std::int64_t> last_input_us_;
  std::optional<std::int64_t> sync_run_start_us_;
  std::optional<std::int64_t> wrong_run_start_us_;
};

}  // namespace rehab::session
