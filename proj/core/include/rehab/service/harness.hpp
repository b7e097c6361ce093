// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rehab/emg/classifier.hpp"
#include "rehab/emg/features.hpp"
#include "rehab/service/broadcaster.hpp"
#include "rehab/session/plan.hpp"
#include "rehab/sim/script.hpp"
#include "rehab/sim/simulator.hpp"
#include "rehab/store/database.hpp"
#include "rehab/store/session_log.hpp"

// Deterministic in-process wiring of the simulator and the host pipeline. Both sides
// advance together on a virtual clock, one packet interval at a time, exchanging the same
// framed bytes a socket would carry.
namespace rehab::service {

struct LockstepOptions {
  double reject_threshold = emg::kDefaultRejectThreshold;
  std::filesystem::path data_dir;  // empty: no log files
  std::string session_id = "lockstep";
  /// Start the device with streaming off so the host's SetMode is what enables it.
  bool device_starts_idle = true;
};

struct LockstepResult {
  std::vector<WireEvent> events;
  sim::SimStatus device;
  store::SessionLog log;
  nlohmann::json final_state;
};

LockstepResult run_lockstep(const sim::GestureScript& script, const sim::EmgSynthModel& model,
                            const store::TemplateDatabase& db, const session::ExercisePlan& plan,
                            const LockstepOptions& options = {});

/// Windows of a steady hold of `label` as decoded from simulator packets, skipping windows
/// that overlap the onset ramp.
std::vector<emg::EmgWindow> simulate_gesture_windows(const sim::EmgSynthModel& model,
                                                     emg::GestureLabel label, std::int64_t hold_ms,
                                                     const emg::FeatureConfig& config);

/// Calibrates every label in `labels` from simulated holds of `hold_ms` each.
store::TemplateDatabase calibrate_from_simulator(const sim::EmgSynthModel& model,
                                                 std::span<const emg::GestureLabel> labels,
                                                 std::int64_t hold_ms,
                                                 const emg::FeatureConfig& config = {},
                                                 int min_windows = store::kDefaultMinCalibrationWindows);

/// Feedback events (session kinds only) from a wire stream, in order.
std::vector<session::FeedbackEvent> feedback_events(std::span<const WireEvent> events);

}  // namespace rehab::service
