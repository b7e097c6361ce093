// SPDX-License-Identifier: Apache-2.0
#include "rehab/sim/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace rehab::sim {

using emg::GestureLabel;

EmgSynthModel EmgSynthModel::default_model(std::uint64_t seed) {
  EmgSynthModel m;
  m.seed = seed;
  m.gain[GestureLabel::Rest] = {0, 0, 0, 0, 0, 0, 0, 0};
  m.gain[GestureLabel::Fist] = {1.0, 0.9, 0.8, 0.9, 0.15, 0.1, 0.1, 0.15};
  m.gain[GestureLabel::FingersSpread] = {0.15, 0.1, 0.1, 0.15, 0.9, 0.9, 0.8, 0.9};
  m.gain[GestureLabel::WaveOut] = {0.05, 0.05, 0.1, 0.1, 0.3, 0.9, 1.0, 0.8};
  m.gain[GestureLabel::WaveIn] = {0.1, 0.8, 1.0, 0.9, 0.1, 0.05, 0.05, 0.05};
  return m;
}

void EmgSynthModel::validate() const {
  if (!(baseline_amp >= 0.0) || !(amplitude >= 0.0) || !(noise_std > 0.0) || ramp_ms < 0) {
    throw Error(ErrorCode::InvalidArgument, "synth model amplitudes out of range");
  }
  for (auto label : emg::kTemplateLabels) {
    auto it = gain.find(label);
    if (it == gain.end()) {
      throw Error(ErrorCode::InvalidArgument, "no gain profile for " + std::string(emg::to_string(label)));
    }
    const auto& g = it->second;
    if (std::any_of(g.begin(), g.end(), [](double v) { return v < 0.0 || v > 1.0; })) {
      throw Error(ErrorCode::InvalidArgument, "gains must lie in [0, 1]");
    }
    const double peak = *std::max_element(g.begin(), g.end());
    if (label == GestureLabel::Rest && peak != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "Rest gain must be zero");
    }
    if (label != GestureLabel::Rest && peak < 0.5) {
      throw Error(ErrorCode::InvalidArgument, "active profile needs a gain >= 0.5");
    }
    for (auto other : emg::kTemplateLabels) {
      if (other != label && gain.contains(other) && gain.at(other) == g) {
        throw Error(ErrorCode::InvalidArgument, "gain profiles must be distinct");
      }
    }
  }
}

const ChannelGains& EmgSynthModel::gains(GestureLabel label) const {
  auto it = gain.find(label);
  if (it == gain.end()) {
    throw Error(ErrorCode::InvalidArgument, "no gain profile for " + std::string(emg::to_string(label)));
  }
  return it->second;
}

std::int8_t synth_sample_with_gain(const EmgSynthModel& model, double gain, Rng& rng) {
  std::normal_distribution<double> noise(0.0, model.noise_std);
  // Both draws happen unconditionally so the stream position never depends on the label.
  const double n = noise(rng);
  const double jitter = noise(rng);
  const double v = std::round(gain * model.amplitude * n + model.baseline_amp * jitter);
  return static_cast<std::int8_t>(std::clamp(v, -128.0, 127.0));
}

std::int8_t synth_sample(const EmgSynthModel& model, GestureLabel label, int channel, Rng& rng) {
  if (channel < 0 || channel >= emg::kChannels) {
    throw Error(ErrorCode::BadChannel, "channel " + std::to_string(channel));
  }
  return synth_sample_with_gain(model, model.gains(label)[static_cast<std::size_t>(channel)], rng);
}

DeviceSimulator::DeviceSimulator(GestureScript script, EmgSynthModel model, proto::SetMode initial_mode)
    : script_(std::move(script)), model_(std::move(model)), rng_(model_.seed) {
  script_.validate();
  model_.validate();
  status_.mode = initial_mode;
  status_.connected = true;
  for (const auto& e : script_.entries) {
    boundaries_us_.push_back(e.start_ms * 1000);
    boundaries_us_.push_back((e.start_ms + e.duration_ms) * 1000);
  }
  std::sort(boundaries_us_.begin(), boundaries_us_.end());
  boundaries_us_.erase(std::unique(boundaries_us_.begin(), boundaries_us_.end()), boundaries_us_.end());
}

void DeviceSimulator::receive(proto::ByteView framed, std::int64_t now_us) {
  std::vector<proto::FramedMessage> messages;
  try {
    messages = inbound_.feed(framed);
  } catch (const Error&) {
    ++status_.rejected_commands;
    inbound_.reset();
    return;
  }
  for (const auto& m : messages) {
    if (m.attribute_id != static_cast<std::uint16_t>(proto::Attribute::Command)) {
      ++status_.rejected_commands;
      continue;
    }
    try {
      apply(proto::decode_command(m.payload), now_us);
    } catch (const Error&) {
      ++status_.rejected_commands;
    }
  }
}

void DeviceSimulator::apply(const proto::Command& cmd, std::int64_t now_us) {
  if (const auto* m = std::get_if<proto::SetMode>(&cmd)) {
    status_.mode = *m;
    status_.asleep = false;
  } else if (const auto* v = std::get_if<proto::Vibrate>(&cmd)) {
    status_.vibrations.emplace_back(now_us / 1000, v->kind);
    status_.synced = true;
  } else {
    status_.asleep = true;
    status_.mode = proto::SetMode{};
  }
}

ChannelGains DeviceSimulator::gains_at(std::int64_t t_us) const {
  const auto& target = model_.gains(script_.label_at_us(t_us));
  const std::int64_t ramp_us = model_.ramp_ms * 1000;
  auto it = std::upper_bound(boundaries_us_.begin(), boundaries_us_.end(), t_us);
  if (ramp_us == 0 || it == boundaries_us_.begin()) return target;
  const std::int64_t boundary = *std::prev(it);
  if (t_us - boundary >= ramp_us) return target;
  const auto& before = model_.gains(script_.label_at_us(boundary - 1));
  const double w = static_cast<double>(t_us - boundary) / static_cast<double>(ramp_us);
  ChannelGains g{};
  for (std::size_t ch = 0; ch < g.size(); ++ch) g[ch] = before[ch] + w * (target[ch] - before[ch]);
  return g;
}

proto::Bytes DeviceSimulator::advance_to(std::int64_t until_us) {
  proto::Bytes out;
  while (next_tick_us_ <= until_us && next_tick_us_ < end_us()) {
    const std::int64_t t = next_tick_us_;
    if (!status_.asleep && proto::emg_streaming(status_.mode.emg_mode)) {
      proto::EmgDataPacket packet;
      for (std::size_t s = 0; s < 2; ++s) {
        const auto g = gains_at(t + static_cast<std::int64_t>(s) * proto::kEmgFramePeriodUs);
        for (std::size_t ch = 0; ch < g.size(); ++ch) {
          packet.samples[s][ch] = synth_sample_with_gain(model_, g[ch], rng_);
        }
      }
      const auto frame = proto::frame_write(proto::Attribute::Emg, proto::encode_emg_packet(packet));
      out.insert(out.end(), frame.begin(), frame.end());
      ++status_.emg_packets;
    }
    if (!status_.asleep && proto::imu_streaming(status_.mode.imu_mode) &&
        t % kImuPacketIntervalUs == 0) {
      // Arm at rest: identity orientation, gravity on z.
      proto::ImuDataPacket imu;
      imu.orientation = {static_cast<std::int16_t>(proto::kQuaternionScale), 0, 0, 0};
      imu.accel = {0, 0, static_cast<std::int16_t>(proto::kAccelScale)};
      const auto frame = proto::frame_write(proto::Attribute::Imu, proto::encode_imu_packet(imu));
      out.insert(out.end(), frame.begin(), frame.end());
      ++status_.imu_packets;
    }
    next_tick_us_ += kEmgPacketIntervalUs;
  }
  now_us_ = std::max(now_us_, until_us);
  return out;
}

SimStatus run_script(const GestureScript& script, const EmgSynthModel& model, Transport& transport,
                     Clock& clock, const RunOptions& options) {
  DeviceSimulator sim(script, model, options.initial_mode);
  const std::int64_t base = clock.now_us();
  const std::int64_t stop = sim.end_us() + options.linger_us;
  try {
    for (std::int64_t t = 0; t < stop || t == 0; t += kEmgPacketIntervalUs) {
      clock.sleep_until_us(base + t);
      auto inbound = transport.read(std::chrono::milliseconds(0));
      if (!inbound.empty()) sim.receive(inbound, t);
      auto out = sim.advance_to(t);
      if (!out.empty()) transport.write(out);
    }
    // Commands that arrived during the final interval.
    auto inbound = transport.read(std::chrono::milliseconds(0));
    if (!inbound.empty()) sim.receive(inbound, stop);
    if (options.linger_until_closed) {
      try {
        for (;;) {
          inbound = transport.read(std::chrono::milliseconds(50));
          if (!inbound.empty()) sim.receive(inbound, std::max(stop, clock.now_us() - base));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TransportClosed) throw;
      }
      sim.status().connected = false;
      return sim.status();
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TransportClosed) throw;
    sim.status().connected = false;
    throw SimulationAborted(e.what(), sim.status());
  }
  return sim.status();
}

}  // namespace rehab::sim
