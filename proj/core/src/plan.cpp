// SPDX-License-Identifier: Apache-2.0
#include "rehab/session/plan.hpp"

#include <cmath>

#include "rehab/error.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::session {

using nlohmann::json;

void ExerciseSpec::validate() const {
  if (!emg::is_active_gesture(target)) {
    throw Error(ErrorCode::InvalidExercise,
                "target must be an active gesture, got " + std::string(emg::to_string(target)));
  }
  if (!(hold_s > 0.0) || !std::isfinite(hold_s)) {
    throw Error(ErrorCode::InvalidExercise, "hold_s must be > 0");
  }
  if (reps_per_set < 1) throw Error(ErrorCode::InvalidExercise, "reps_per_set must be >= 1");
  if (sets < 1) throw Error(ErrorCode::InvalidExercise, "sets must be >= 1");
  if (!(rest_between_reps_s >= 0.0) || !(rest_between_sets_s >= 0.0)) {
    throw Error(ErrorCode::InvalidExercise, "rest durations must be >= 0");
  }
}

void EngineParams::validate() const {
  if (sync_hold_ms < 0 || wrong_ms < 0 || dropout_ms < 0) {
    throw Error(ErrorCode::InvalidExercise, "engine timings must be >= 0");
  }
}

ExercisePlan ExercisePlan::default_plan() {
  ExercisePlan plan;
  ExerciseSpec fist;
  fist.target = emg::GestureLabel::Fist;
  ExerciseSpec spread;
  spread.target = emg::GestureLabel::FingersSpread;
  plan.exercises = {fist, spread};
  return plan;
}

void ExercisePlan::validate() const {
  if (exercises.empty()) throw Error(ErrorCode::EmptyPlan, "plan has no exercises");
  for (const auto& e : exercises) e.validate();
  params.validate();
}

json spec_to_json(const ExerciseSpec& spec) {
  return json{{"target", emg::to_string(spec.target)},
              {"hold_s", spec.hold_s},
              {"reps_per_set", spec.reps_per_set},
              {"sets", spec.sets},
              {"rest_between_reps_s", spec.rest_between_reps_s},
              {"rest_between_sets_s", spec.rest_between_sets_s}};
}

ExerciseSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "exercise must be an object");
  ExerciseSpec s;
  try {
    const auto target = emg::parse_gesture(j.at("target").get<std::string>());
    if (!target) throw Error(ErrorCode::BadRequest, "unknown target " + j.at("target").dump());
    s.target = *target;
    s.hold_s = j.value("hold_s", s.hold_s);
    s.reps_per_set = j.value("reps_per_set", s.reps_per_set);
    s.sets = j.value("sets", s.sets);
    s.rest_between_reps_s = j.value("rest_between_reps_s", s.rest_between_reps_s);
    s.rest_between_sets_s = j.value("rest_between_sets_s", s.rest_between_sets_s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("exercise: ") + e.what());
  }
  return s;
}

json plan_to_json(const ExercisePlan& plan) {
  json list = json::array();
  for (const auto& e : plan.exercises) list.push_back(spec_to_json(e));
  return json{{"exercises", list},
              {"sync_hold_ms", plan.params.sync_hold_ms},
              {"wrong_ms", plan.params.wrong_ms},
              {"dropout_ms", plan.params.dropout_ms}};
}

ExercisePlan plan_from_json(const json& j) {
  ExercisePlan plan;
  const json* list = nullptr;
  if (j.is_array()) {
    list = &j;
  } else if (j.is_object() && j.contains("exercises")) {
    list = &j.at("exercises");
    try {
      plan.params.sync_hold_ms = j.value("sync_hold_ms", plan.params.sync_hold_ms);
      plan.params.wrong_ms = j.value("wrong_ms", plan.params.wrong_ms);
      plan.params.dropout_ms = j.value("dropout_ms", plan.params.dropout_ms);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::BadRequest, std::string("plan params: ") + e.what());
    }
    if (!list->is_array()) throw Error(ErrorCode::BadRequest, "exercises must be a list");
  } else {
    throw Error(ErrorCode::BadRequest, "plan must be a list or an object with exercises");
  }
  for (const auto& e : *list) plan.exercises.push_back(spec_from_json(e));
  plan.validate();
  return plan;
}

ExercisePlan load_plan(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(store::read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, path.string() + ": " + e.what());
  }
  return plan_from_json(j);
}

}  // namespace rehab::session
