// SPDX-License-Identifier: Apache-2.0
#include "rehab/service/harness.hpp"

#include <set>

#include "rehab/error.hpp"
#include "rehab/protocol/framing.hpp"
#include "rehab/service/pipeline.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::service {

LockstepResult run_lockstep(const sim::GestureScript& script, const sim::EmgSynthModel& model,
                            const store::TemplateDatabase& db, const session::ExercisePlan& plan,
                            const LockstepOptions& options) {
  Broadcaster broadcaster;
  PipelineOptions popts;
  popts.reject_threshold = options.reject_threshold;
  popts.data_dir = options.data_dir;
  Pipeline pipeline(popts, [&](std::int64_t t, const std::string& kind, const nlohmann::json& d) {
    broadcaster.publish(t, kind, d);
  });
  pipeline.set_database(db);
  pipeline.start_session(plan, options.session_id);

  const proto::SetMode initial = options.device_starts_idle
                                     ? proto::SetMode{}
                                     : proto::SetMode{proto::emg_mode::kRaw, proto::imu_mode::kData, 0};
  sim::DeviceSimulator device(script, model, initial);
  device.receive(pipeline.on_connected(), 0);

  for (std::int64_t t = 0; t < device.end_us(); t += sim::kEmgPacketIntervalUs) {
    const auto notifications = device.advance_to(t);
    if (notifications.empty()) continue;
    const auto commands = pipeline.on_bytes(notifications);
    if (!commands.empty()) device.receive(commands, t);
  }

  LockstepResult result;
  result.events = broadcaster.since(0);
  result.device = device.status();
  result.log = pipeline.log().value_or(store::SessionLog{});
  result.final_state = pipeline.state_json();
  return result;
}

std::vector<emg::EmgWindow> simulate_gesture_windows(const sim::EmgSynthModel& model,
                                                     emg::GestureLabel label, std::int64_t hold_ms,
                                                     const emg::FeatureConfig& config) {
  sim::GestureScript script;
  script.entries.push_back({label, 0, hold_ms});
  script.total_ms = hold_ms;
  sim::DeviceSimulator device(script, model,
                              proto::SetMode{proto::emg_mode::kRaw, proto::imu_mode::kNone, 0});
  const auto bytes = device.advance_to(device.end_us());

  proto::FrameReader reader;
  emg::Windower windower(config.window_ms, config.step_ms, config.sample_rate_hz);
  std::vector<emg::EmgWindow> out;
  std::int64_t t = 0;
  const std::int64_t settle_us = model.ramp_ms * 1000;
  for (const auto& m : reader.feed(bytes)) {
    if (m.attribute_id != static_cast<std::uint16_t>(proto::Attribute::Emg)) continue;
    const auto [a, b] = proto::decode_emg_packet(m.payload, t);
    t = b.timestamp_us + proto::kEmgFramePeriodUs;
    for (const auto& f : {a, b}) {
      if (auto w = windower.push(f); w && w->start_us() >= settle_us) out.push_back(std::move(*w));
    }
  }
  return out;
}

store::TemplateDatabase calibrate_from_simulator(const sim::EmgSynthModel& model,
                                                 std::span<const emg::GestureLabel> labels,
                                                 std::int64_t hold_ms, const emg::FeatureConfig& config,
                                                 int min_windows) {
  store::CalibrationBuffers buffers(config);
  for (auto label : labels) {
    buffers.record(label, simulate_gesture_windows(model, label, hold_ms, config));
  }
  return store::calibration_finalize(buffers, min_windows);
}

std::vector<session::FeedbackEvent> feedback_events(std::span<const WireEvent> events) {
  static const std::set<std::string, std::less<>> kinds = {
      "sync_detected", "vibrate_requested", "prompt",          "correct_movement",
      "incorrect_movement", "rep_counted", "set_completed", "exercise_completed",
      "session_completed"};
  std::vector<session::FeedbackEvent> out;
  for (const auto& e : events) {
    if (!kinds.contains(e.kind)) continue;
    out.push_back({e.t_us, session::parse_event(e.kind, e.detail)});
  }
  return out;
}

}  // namespace rehab::service
