// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "rehab/emg/classifier.hpp"
#include "rehab/emg/features.hpp"
#include "rehab/protocol/framing.hpp"
#include "rehab/session/engine.hpp"
#include "rehab/store/session_log.hpp"
#include "rehab/store/templates.hpp"

namespace rehab::service {

/// Receives every outbound event: session feedback kinds plus service status kinds
/// (device_connected, device_disconnected, session_started, session_aborted,
/// calibration_started, calibration_stopped, snapshot).
using EmitFn = std::function<void(std::int64_t t_us, const std::string& kind, const nlohmann::json& detail)>;

struct PipelineOptions {
  double reject_threshold = emg::kDefaultRejectThreshold;
  int min_calibration_windows = store::kDefaultMinCalibrationWindows;
  /// Session logs go to <data_dir>/sessions/<id>.json; empty disables persistence.
  std::filesystem::path data_dir;
  /// Where a database completed through calibration is written; empty keeps it in memory.
  std::filesystem::path db_path;
  /// Minimum spacing of snapshot events while a hold is in progress.
  std::int64_t snapshot_interval_us = 250'000;
};

/// Host-side processing chain, driven from a single thread:
/// framed bytes -> decode -> windows -> features -> classification -> session engine.
/// Host time is derived from the sample count (5 ms per frame) and keeps running across
/// reconnects, so a session pauses in place while the device is away.
class Pipeline {
 public:
  Pipeline(PipelineOptions options, EmitFn emit);

  /// Throws StartupFailure if the database cannot drive a session classifier.
  void set_database(store::TemplateDatabase db);
  const std::optional<store::TemplateDatabase>& database() const noexcept { return db_; }

  /// Throws Conflict when a session is running or no usable database is loaded.
  void start_session(session::ExercisePlan plan, std::string session_id, std::string started_at = {});
  /// Throws Conflict when no session is running.
  void abort_session();
  bool session_active() const noexcept;
  const std::optional<session::SessionEngine>& engine() const noexcept { return engine_; }
  const std::optional<store::SessionLog>& log() const noexcept { return log_; }

  /// Throws BadLabel for Unknown and Conflict while a session runs.
  void start_calibration(emg::GestureLabel label);
  /// Ends recording for `label`; if enough windows were collected the label's template is
  /// (re)built into the database. Returns {label, windows, template_built, db_ready}.
  nlohmann::json stop_calibration(emg::GestureLabel label);
  std::optional<emg::GestureLabel> calibrating() const noexcept { return calibrating_; }
  const store::CalibrationBuffers& calibration_buffers() const noexcept { return buffers_; }

  /// Returns the framed SetMode command that starts streaming.
  proto::Bytes on_connected();
  void on_disconnected();
  bool connected() const noexcept { return connected_; }

  /// Consumes inbound framed bytes; returns framed commands for the device.
  proto::Bytes on_bytes(proto::ByteView bytes);

  /// Session snapshot, or {"phase": "idle"} without a session, plus link status.
  nlohmann::json state_json() const;

  std::int64_t now_us() const noexcept { return next_frame_us_; }
  const std::optional<emg::Classification>& last_classification() const noexcept { return last_; }
  std::uint64_t malformed_packets() const noexcept { return malformed_packets_; }

 private:
  void on_frame(const emg::EmgFrame& frame, proto::Bytes& outbound);
  void on_window(const emg::EmgWindow& window, proto::Bytes& outbound);
  void dispatch(const std::vector<session::FeedbackEvent>& events, proto::Bytes& outbound);
  void emit_snapshot(std::int64_t t_us);
  void persist_log();

  PipelineOptions options_;
  EmitFn emit_;
  std::optional<store::TemplateDatabase> db_;
  emg::FeatureConfig config_;
  emg::Windower windower_;
  proto::FrameReader reader_;
  store::CalibrationBuffers buffers_;
  std::optional<emg::GestureLabel> calibrating_;
  std::optional<session::SessionEngine> engine_;
  std::optional<store::SessionLog> log_;
  std::optional<emg::Classification> last_;
  std::int64_t next_frame_us_ = 0;
  std::int64_t last_snapshot_us_ = -1;
  std::uint64_t malformed_packets_ = 0;
  bool connected_ = false;
};

}  // namespace rehab::service
