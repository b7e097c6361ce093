// SPDX-License-Identifier: Apache-2.0
#include "rehab/service/pipeline.hpp"

#include "rehab/error.hpp"

namespace rehab::service {

using nlohmann::json;

Pipeline::Pipeline(PipelineOptions options, EmitFn emit)
    : options_(std::move(options)),
      emit_(std::move(emit)),
      windower_(config_.window_ms, config_.step_ms, config_.sample_rate_hz),
      buffers_(config_) {}

void Pipeline::set_database(store::TemplateDatabase db) {
  try {
    db.feature_config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::StartupFailure, std::string("database feature config: ") + e.what());
  }
  if (db.templates.empty()) throw Error(ErrorCode::StartupFailure, "database has no templates");
  if (!(db.feature_config == config_)) {
    config_ = db.feature_config;
    windower_ = emg::Windower(config_.window_ms, config_.step_ms, config_.sample_rate_hz);
    buffers_ = store::CalibrationBuffers(config_);
  }
  db_ = std::move(db);
}

bool Pipeline::session_active() const noexcept { return engine_ && !engine_->completed(); }

void Pipeline::start_session(session::ExercisePlan plan, std::string session_id,
                             std::string started_at) {
  if (session_active()) throw Error(ErrorCode::Conflict, "a session is already running");
  if (!db_) throw Error(ErrorCode::Conflict, "no template database loaded");
  if (!db_->session_ready()) {
    throw Error(ErrorCode::Conflict, "database needs Rest plus at least one active gesture");
  }
  if (!db_->templates.contains(emg::GestureLabel::WaveOut)) {
    throw Error(ErrorCode::Conflict, "no template for the wave_out sync gesture");
  }
  for (const auto& ex : plan.exercises) {
    if (!db_->templates.contains(ex.target)) {
      throw Error(ErrorCode::Conflict,
                  "no template for target " + std::string(emg::to_string(ex.target)));
    }
  }
  if (calibrating_) throw Error(ErrorCode::Conflict, "calibration in progress");
  session::SessionEngine engine(plan);  // validates
  engine_ = std::move(engine);
  log_ = store::SessionLog{};
  log_->session_id = std::move(session_id);
  log_->started_at = std::move(started_at);
  log_->plan = session::plan_to_json(plan);
  persist_log();
  emit_(next_frame_us_, "session_started", json{{"session_id", log_->session_id}});
  emit_snapshot(next_frame_us_);
}

void Pipeline::abort_session() {
  if (!session_active()) throw Error(ErrorCode::Conflict, "no session is running");
  const auto id = log_->session_id;
  persist_log();
  engine_.reset();
  emit_(next_frame_us_, "session_aborted", json{{"session_id", id}});
  emit_snapshot(next_frame_us_);
}

void Pipeline::start_calibration(emg::GestureLabel label) {
  if (label == emg::GestureLabel::Unknown) throw Error(ErrorCode::BadLabel, "cannot calibrate unknown");
  if (session_active()) throw Error(ErrorCode::Conflict, "session in progress");
  calibrating_ = label;
  emit_(next_frame_us_, "calibration_started", json{{"label", emg::to_string(label)}});
}

json Pipeline::stop_calibration(emg::GestureLabel label) {
  if (label == emg::GestureLabel::Unknown) throw Error(ErrorCode::BadLabel, "cannot calibrate unknown");
  if (calibrating_ != label) {
    throw Error(ErrorCode::Conflict, "not calibrating " + std::string(emg::to_string(label)));
  }
  calibrating_.reset();
  const auto windows = buffers_.count(label);
  bool built = false;
  if (static_cast<int>(windows) >= options_.min_calibration_windows && windows > 0) {
    auto tmpl = store::build_template(label, buffers_.buffers().at(label), config_);
    if (!db_) {
      store::TemplateDatabase db;
      db.feature_config = config_;
      db_ = std::move(db);
    }
    db_->templates[label] = std::move(tmpl);
    buffers_.clear(label);
    built = true;
    if (!options_.db_path.empty()) store::save_db(*db_, options_.db_path);
  }
  json result{{"label", emg::to_string(label)},
              {"windows", windows},
              {"template_built", built},
              {"db_ready", db_ && db_->session_ready()}};
  emit_(next_frame_us_, "calibration_stopped", result);
  return result;
}

proto::Bytes Pipeline::on_connected() {
  connected_ = true;
  reader_.reset();
  windower_.reset();
  emit_(next_frame_us_, "device_connected", json::object());
  const proto::SetMode mode{proto::emg_mode::kRaw, proto::imu_mode::kData, 0};
  return proto::frame_write(proto::Attribute::Command, proto::encode_command(mode));
}

void Pipeline::on_disconnected() {
  if (!connected_) return;
  connected_ = false;
  reader_.reset();
  windower_.reset();
  emit_(next_frame_us_, "device_disconnected", json::object());
}

proto::Bytes Pipeline::on_bytes(proto::ByteView bytes) {
  proto::Bytes outbound;
  std::vector<proto::FramedMessage> messages;
  try {
    messages = reader_.feed(bytes);
  } catch (const Error&) {
    // Framing lost; resynchronise on the next chunk.
    ++malformed_packets_;
    reader_.reset();
    return outbound;
  }
  for (const auto& m : messages) {
    try {
      switch (static_cast<proto::Attribute>(m.attribute_id)) {
        case proto::Attribute::Emg: {
          const auto [a, b] = proto::decode_emg_packet(m.payload, next_frame_us_);
          on_frame(a, outbound);
          on_frame(b, outbound);
          break;
        }
        case proto::Attribute::Imu:
          (void)proto::decode_imu_packet(m.payload);  // decoded, not used for judging
          break;
        case proto::Attribute::ClassifierEvent:
          (void)proto::decode_classifier_event(m.payload);
          break;
        default:
          ++malformed_packets_;
      }
    } catch (const Error&) {
      ++malformed_packets_;
    }
  }
  return outbound;
}

void Pipeline::on_frame(const emg::EmgFrame& frame, proto::Bytes& outbound) {
  next_frame_us_ = frame.timestamp_us + proto::kEmgFramePeriodUs;
  if (auto window = windower_.push(frame)) on_window(*window, outbound);
}

void Pipeline::on_window(const emg::EmgWindow& window, proto::Bytes& outbound) {
  if (calibrating_) {
    const std::array<emg::EmgWindow, 1> one{window};
    buffers_.record(*calibrating_, one);
  }
  if (!db_ || db_->templates.empty()) return;
  const auto fv = emg::featurize(window, config_);
  last_ = emg::classify(fv, *db_, options_.reject_threshold, window.end_us());
  if (!session_active()) return;
  const auto events = engine_->on_classification(*last_);
  dispatch(events, outbound);
  if (!events.empty()) {
    emit_snapshot(window.end_us());
  } else if (engine_->phase() == session::Phase::Holding &&
             window.end_us() - last_snapshot_us_ >= options_.snapshot_interval_us) {
    emit_snapshot(window.end_us());
  }
}

void Pipeline::dispatch(const std::vector<session::FeedbackEvent>& events, proto::Bytes& outbound) {
  if (events.empty()) return;
  for (const auto& e : events) store::append_log(*log_, e.payload, e.t_us);
  persist_log();
  for (const auto& e : events) {
    emit_(e.t_us, std::string(session::kind_name(e.payload)), session::event_detail(e.payload));
    if (const auto* v = std::get_if<session::ev::VibrateRequested>(&e.payload)) {
      const auto cmd = proto::encode_command(proto::Vibrate{static_cast<std::uint8_t>(v->kind)});
      const auto framed = proto::frame_write(proto::Attribute::Command, cmd);
      outbound.insert(outbound.end(), framed.begin(), framed.end());
    }
  }
}

void Pipeline::emit_snapshot(std::int64_t t_us) {
  last_snapshot_us_ = t_us;
  emit_(t_us, "snapshot", state_json());
}

void Pipeline::persist_log() {
  if (!log_ || options_.data_dir.empty()) return;
  store::save_log(*log_, store::session_log_path(options_.data_dir, log_->session_id));
}

json Pipeline::state_json() const {
  json j = engine_ ? session::snapshot_to_json(engine_->snapshot()) : json{{"phase", "idle"}};
  j["connected"] = connected_;
  j["db_loaded"] = db_.has_value();
  j["db_ready"] = db_ && db_->session_ready();
  j["session_id"] = log_ && engine_ ? json(log_->session_id) : json();
  j["calibrating"] = calibrating_ ? json(emg::to_string(*calibrating_)) : json();
  if (last_) {
    j["last_classification"] = json{{"label", emg::to_string(last_->label)},
                                    {"distance", last_->distance},
                                    {"t_us", last_->timestamp_us}};
  }
  j["t_us"] = next_frame_us_;
  return j;
}

}  // namespace rehab::service
