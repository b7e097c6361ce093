// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "rehab/emg/gesture.hpp"

namespace rehab::session {

/// One prescribed exercise: hold `target` for hold_s, reps_per_set times, in `sets` sets.
struct ExerciseSpec {
  emg::GestureLabel target = emg::GestureLabel::Fist;
  double hold_s = 5.0;
  int reps_per_set = 5;
  int sets = 3;
  double rest_between_reps_s = 3.0;
  double rest_between_sets_s = 30.0;

  /// Throws InvalidExercise.
  void validate() const;

  bool operator==(const ExerciseSpec&) const = default;
};

/// Timing thresholds of the state machine.
struct EngineParams {
  int sync_hold_ms = 1000;
  int wrong_ms = 500;
  int dropout_ms = 200;

  void validate() const;

  bool operator==(const EngineParams&) const = default;
};

struct ExercisePlan {
  std::vector<ExerciseSpec> exercises;
  EngineParams params;

  /// Fist then FingersSpread, 3 sets of 5 reps with 5 s holds.
  static ExercisePlan default_plan();

  /// Throws EmptyPlan or InvalidExercise.
  void validate() const;

  bool operator==(const ExercisePlan&) const = default;
};

nlohmann::json spec_to_json(const ExerciseSpec& spec);
ExerciseSpec spec_from_json(const nlohmann::json& j);

/// Object form: {"exercises": [...], "sync_hold_ms", "wrong_ms", "dropout_ms"}.
nlohmann::json plan_to_json(const ExercisePlan& plan);

/// Accepts either a bare list of exercise specs or the object form. Missing spec fields take
/// their defaults. Throws BadRequest on malformed input and EmptyPlan / InvalidExercise on
/// invalid plans.
ExercisePlan plan_from_json(const nlohmann::json& j);
ExercisePlan load_plan(const std::filesystem::path& path);

}  // namespace rehab::session
