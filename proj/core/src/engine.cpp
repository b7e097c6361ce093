// SPDX-License-Identifier: Apache-2.0
#include "rehab/session/engine.hpp"

#include <algorithm>
#include <cmath>

#include "rehab/error.hpp"

namespace rehab::session {

using emg::GestureLabel;

namespace {

std::int64_t seconds_to_us(double s) { return static_cast<std::int64_t>(std::llround(s * 1e6)); }
std::int64_t ms_to_us(int ms) { return static_cast<std::int64_t>(ms) * 1000; }

}  // namespace

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::AwaitingSync: return "awaiting_sync";
    case Phase::Prompting: return "prompting";
    case Phase::Holding: return "holding";
    case Phase::RepRest: return "rep_rest";
    case Phase::SetRest: return "set_rest";
    case Phase::Completed: return "completed";
  }
  return "unknown";
}

nlohmann::json snapshot_to_json(const SessionSnapshot& s) {
  nlohmann::json j{{"phase", to_string(s.phase)},
                   {"exercise_index", s.exercise_index},
                   {"exercise_count", s.exercise_count},
                   {"target", emg::to_string(s.target)},
                   {"set_index", s.set_index},
                   {"sets", s.sets},
                   {"rep_index", s.rep_index},
                   {"reps_per_set", s.reps_per_set},
                   {"reps_done", s.reps_done},
                   {"sets_done", s.sets_done},
                   {"exercises_done", s.exercises_done},
                   {"total_reps_done", s.total_reps_done},
                   {"total_reps", s.total_reps},
                   {"held_ms", s.held_ms},
                   {"hold_ms", s.hold_ms},
                   {"held_fraction", s.held_fraction}};
  j["rest_until_us"] = s.rest_until_us ? nlohmann::json(*s.rest_until_us) : nlohmann::json();
  j["last_input_us"] = s.last_input_us ? nlohmann::json(*s.last_input_us) : nlohmann::json();
  return j;
}

SessionEngine::SessionEngine(ExercisePlan plan) : plan_(std::move(plan)) { plan_.validate(); }

std::int64_t SessionEngine::hold_us() const { return seconds_to_us(current().hold_s); }

void SessionEngine::check_time(std::int64_t t_us) {
  if (last_input_us_ && t_us < *last_input_us_) {
    throw Error(ErrorCode::NonMonotonicInput, "input at " + std::to_string(t_us) +
                                                  " precedes " + std::to_string(*last_input_us_));
  }
  last_input_us_ = t_us;
}

std::vector<FeedbackEvent> SessionEngine::on_classification(const emg::Classification& c) {
  check_time(c.timestamp_us);
  Events out;
  advance_timers(c.timestamp_us, out);
  switch (phase_) {
    case Phase::AwaitingSync: on_sync_input(c, out); break;
    case Phase::Prompting: on_prompting_input(c, out); break;
    case Phase::Holding: on_holding_input(c, out); break;
    case Phase::RepRest:
    case Phase::SetRest:
    case Phase::Completed: break;
  }
  // Zero-length rests expire immediately.
  advance_timers(c.timestamp_us, out);
  return out;
}

std::vector<FeedbackEvent> SessionEngine::tick(std::int64_t now_us) {
  check_time(now_us);
  Events out;
  advance_timers(now_us, out);
  return out;
}

void SessionEngine::advance_timers(std::int64_t t_us, Events& out) {
  if ((phase_ == Phase::RepRest || phase_ == Phase::SetRest) && t_us >= rest_until_us_) {
    enter_prompt(rest_until_us_, out);
  }
  if (phase_ == Phase::Holding && t_us - last_target_us_ > ms_to_us(plan_.params.dropout_ms)) {
    // Long interruption: the hold is lost without feedback.
    phase_ = Phase::Prompting;
    held_us_ = 0;
  }
}

void SessionEngine::enter_prompt(std::int64_t t_us, Events& out) {
  phase_ = Phase::Prompting;
  held_us_ = 0;
  wrong_run_start_us_.reset();
  if (rep_ == 0) reps_done_ = 0;
  if (rep_ == 0 && set_ == 0) sets_done_ = 0;
  out.push_back({t_us, ev::Prompt{exercise_, current().target, set_, rep_}});
}

void SessionEngine::on_sync_input(const emg::Classification& c, Events& out) {
  if (c.label != GestureLabel::WaveOut) {
    sync_run_start_us_.reset();
    return;
  }
  if (!sync_run_start_us_) sync_run_start_us_ = c.timestamp_us;
  if (c.timestamp_us - *sync_run_start_us_ >= ms_to_us(plan_.params.sync_hold_ms)) {
    sync_run_start_us_.reset();
    out.push_back({c.timestamp_us, ev::SyncDetected{}});
    out.push_back({c.timestamp_us, ev::VibrateRequested{VibrationKind::Medium}});
    enter_prompt(c.timestamp_us, out);
  }
}

bool SessionEngine::track_wrong(GestureLabel label, std::int64_t t_us) {
  if (!emg::is_active_gesture(label) || label == current().target) {
    wrong_run_start_us_.reset();
    return false;
  }
  if (!wrong_run_start_us_) wrong_run_start_us_ = t_us;
  return t_us - *wrong_run_start_us_ >= ms_to_us(plan_.params.wrong_ms);
}

void SessionEngine::incorrect(GestureLabel observed, std::int64_t t_us, Events& out) {
  out.push_back({t_us, ev::IncorrectMovement{observed}});
  enter_prompt(t_us, out);  // retry the same rep
}

void SessionEngine::on_prompting_input(const emg::Classification& c, Events& out) {
  if (c.label == current().target) {
    wrong_run_start_us_.reset();
    phase_ = Phase::Holding;
    held_us_ = 0;
    last_target_us_ = c.timestamp_us;
    if (held_us_ >= hold_us()) complete_rep(c.timestamp_us, out);
    return;
  }
  if (track_wrong(c.label, c.timestamp_us)) incorrect(c.label, c.timestamp_us, out);
}

void SessionEngine::on_holding_input(const emg::Classification& c, Events& out) {
  if (c.label == current().target) {
    wrong_run_start_us_.reset();
    held_us_ = std::min(held_us_ + (c.timestamp_us - last_target_us_), hold_us());
    last_target_us_ = c.timestamp_us;
    if (held_us_ >= hold_us()) complete_rep(c.timestamp_us, out);
    return;
  }
  // Within the dropout tolerance; advance_timers handles longer gaps.
  if (track_wrong(c.label, c.timestamp_us)) incorrect(c.label, c.timestamp_us, out);
}

void SessionEngine::complete_rep(std::int64_t t_us, Events& out) {
  const auto& spec = current();
  ++reps_done_;
  ++total_reps_done_;
  out.push_back({t_us, ev::CorrectMovement{}});
  out.push_back({t_us, ev::RepCounted{reps_done_}});
  held_us_ = 0;
  wrong_run_start_us_.reset();

  if (rep_ + 1 < spec.reps_per_set) {
    ++rep_;
    phase_ = Phase::RepRest;
    rest_until_us_ = t_us + seconds_to_us(spec.rest_between_reps_s);
    return;
  }
  ++sets_done_;
  out.push_back({t_us, ev::SetCompleted{sets_done_}});
  if (set_ + 1 < spec.sets) {
    ++set_;
    rep_ = 0;
    phase_ = Phase::SetRest;
    rest_until_us_ = t_us + seconds_to_us(spec.rest_between_sets_s);
    return;
  }
  ++exercises_done_;
  out.push_back({t_us, ev::ExerciseCompleted{exercise_}});
  if (exercise_ + 1 < static_cast<int>(plan_.exercises.size())) {
    const auto rest = seconds_to_us(spec.rest_between_sets_s);
    ++exercise_;
    set_ = 0;
    rep_ = 0;
    phase_ = Phase::SetRest;
    rest_until_us_ = t_us + rest;
    return;
  }
  out.push_back({t_us, ev::SessionCompleted{}});
  phase_ = Phase::Completed;
}

SessionSnapshot SessionEngine::snapshot() const {
  const auto& spec = current();
  SessionSnapshot s;
  s.phase = phase_;
  s.exercise_index = exercise_;
  s.exercise_count = static_cast<int>(plan_.exercises.size());
  s.target = spec.target;
  s.set_index = set_;
  s.sets = spec.sets;
  s.rep_index = rep_;
  s.reps_per_set = spec.reps_per_set;
  s.reps_done = reps_done_;
  s.sets_done = sets_done_;
  s.exercises_done = exercises_done_;
  s.total_reps_done = total_reps_done_;
  for (const auto& e : plan_.exercises) s.total_reps += e.reps_per_set * e.sets;
  s.hold_ms = hold_us() / 1000;
  if (phase_ == Phase::Holding) {
    s.held_ms = held_us_ / 1000;
    s.held_fraction = static_cast<double>(held_us_) / static_cast<double>(hold_us());
  } else if (phase_ == Phase::Completed) {
    s.held_ms = s.hold_ms;
    s.held_fraction = 1.0;
  }
  if (phase_ == Phase::RepRest || phase_ == Phase::SetRest) s.rest_until_us = rest_until_us_;
  s.last_input_us = last_input_us_;
  return s;
}

}  // namespace rehab::session
