// SPDX-License-Identifier: Apache-2.0
#include "rehab/emg/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rehab/error.hpp"

namespace rehab::emg {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void check_channel(int channel) {
  if (channel < 0 || channel >= kChannels) {
    throw Error(ErrorCode::BadChannel, "channel " + std::to_string(channel) + " out of range");
  }
}

void check_lengths(int window_len_ms, int step_ms, int sample_rate_hz) {
  if (sample_rate_hz <= 0) throw Error(ErrorCode::BadWindow, "sample rate must be positive");
  if (step_ms < 1) throw Error(ErrorCode::BadWindow, "step_ms must be >= 1");
  if (window_len_ms < step_ms) throw Error(ErrorCode::BadWindow, "window_len_ms < step_ms");
  if (frames_for(step_ms, sample_rate_hz) < 1) {
    throw Error(ErrorCode::BadWindow, "step shorter than one sample period");
  }
  if (frames_for(window_len_ms, sample_rate_hz) < 2) {
    throw Error(ErrorCode::BadWindow, "window must span at least two samples");
  }
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::string_view to_string(GestureLabel label) noexcept {
  switch (label) {
    case GestureLabel::Rest: return "rest";
    case GestureLabel::Fist: return "fist";
    case GestureLabel::FingersSpread: return "fingers_spread";
    case GestureLabel::WaveOut: return "wave_out";
    case GestureLabel::WaveIn: return "wave_in";
    case GestureLabel::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<GestureLabel> parse_gesture(std::string_view name) noexcept {
  for (auto label : {GestureLabel::Rest, GestureLabel::Fist, GestureLabel::FingersSpread,
                     GestureLabel::WaveOut, GestureLabel::WaveIn, GestureLabel::Unknown}) {
    if (iequals(name, to_string(label))) return label;
  }
  // CamelCase spellings used in docs.
  if (iequals(name, "fingersspread")) return GestureLabel::FingersSpread;
  if (iequals(name, "waveout")) return GestureLabel::WaveOut;
  if (iequals(name, "wavein")) return GestureLabel::WaveIn;
  return std::nullopt;
}

EmgFrame make_frame(std::int64_t timestamp_us, std::span<const int> values) {
  if (values.size() != static_cast<std::size_t>(kChannels)) {
    throw Error(ErrorCode::MalformedStream,
                "frame has " + std::to_string(values.size()) + " channels, expected 8");
  }
  EmgFrame frame;
  frame.timestamp_us = timestamp_us;
  for (int ch = 0; ch < kChannels; ++ch) {
    const int v = values[static_cast<std::size_t>(ch)];
    if (v < -128 || v > 127) {
      throw Error(ErrorCode::MalformedStream, "sample " + std::to_string(v) + " outside int8");
    }
    frame.channels[static_cast<std::size_t>(ch)] = static_cast<std::int8_t>(v);
  }
  return frame;
}

EmgWindow::EmgWindow(std::vector<EmgFrame> frames, int window_len_ms, int step_ms,
                     int sample_rate_hz)
    : frames_(std::move(frames)),
      window_len_ms_(window_len_ms),
      step_ms_(step_ms),
      sample_rate_hz_(sample_rate_hz) {
  check_lengths(window_len_ms, step_ms, sample_rate_hz);
  const auto expected = static_cast<std::size_t>(frames_for(window_len_ms, sample_rate_hz));
  if (frames_.size() != expected) {
    throw Error(ErrorCode::BadWindow, "window holds " + std::to_string(frames_.size()) +
                                          " frames, expected " + std::to_string(expected));
  }
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (frames_[i].timestamp_us <= frames_[i - 1].timestamp_us) {
      throw Error(ErrorCode::MalformedStream, "window timestamps not increasing");
    }
  }
}

std::vector<double> EmgWindow::channel(int channel) const {
  check_channel(channel);
  std::vector<double> out;
  out.reserve(frames_.size());
  for (const auto& f : frames_) out.push_back(f.channels[static_cast<std::size_t>(channel)]);
  return out;
}

std::vector<EmgWindow> slide_windows(std::span<const EmgFrame> stream, int window_len_ms,
                                     int step_ms, int sample_rate_hz) {
  check_lengths(window_len_ms, step_ms, sample_rate_hz);
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].timestamp_us <= stream[i - 1].timestamp_us) {
      throw Error(ErrorCode::MalformedStream,
                  "timestamp regression at frame " + std::to_string(i));
    }
  }
  const auto width = static_cast<std::size_t>(frames_for(window_len_ms, sample_rate_hz));
  const auto step = static_cast<std::size_t>(frames_for(step_ms, sample_rate_hz));
  std::vector<EmgWindow> out;
  for (std::size_t start = 0; start + width <= stream.size(); start += step) {
    std::vector<EmgFrame> frames(stream.begin() + static_cast<std::ptrdiff_t>(start),
                                 stream.begin() + static_cast<std::ptrdiff_t>(start + width));
    out.emplace_back(std::move(frames), window_len_ms, step_ms, sample_rate_hz);
  }
  return out;
}

Windower::Windower(int window_len_ms, int step_ms, int sample_rate_hz)
    : window_len_ms_(window_len_ms), step_ms_(step_ms), sample_rate_hz_(sample_rate_hz) {
  check_lengths(window_len_ms, step_ms, sample_rate_hz);
  window_frames_ = static_cast<std::size_t>(frames_for(window_len_ms, sample_rate_hz));
  step_frames_ = static_cast<std::size_t>(frames_for(step_ms, sample_rate_hz));
}

std::optional<EmgWindow> Windower::push(const EmgFrame& frame) {
  if (last_ts_ && frame.timestamp_us <= *last_ts_) {
    throw Error(ErrorCode::MalformedStream, "timestamp regression in live stream");
  }
  last_ts_ = frame.timestamp_us;
  buffer_.push_back(frame);
  if (buffer_.size() > window_frames_) buffer_.pop_front();
  ++since_emit_;
  if (buffer_.size() < window_frames_) return std::nullopt;
  if (emitted_ && since_emit_ < step_frames_) return std::nullopt;
  emitted_ = true;
  since_emit_ = 0;
  return EmgWindow(std::vector<EmgFrame>(buffer_.begin(), buffer_.end()), window_len_ms_,
                   step_ms_, sample_rate_hz_);
}

void Windower::reset() {
  buffer_.clear();
  since_emit_ = 0;
  emitted_ = false;
  last_ts_.reset();
}

double mav(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::BadWindow, "empty signal");
  double sum = 0.0;
  for (double v : x) sum += std::abs(v);
  return sum / static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::BadWindow, "empty signal");
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum / static_cast<double>(x.size()));
}

double waveform_length(std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += std::abs(x[i] - x[i - 1]);
  return sum;
}

int zero_crossings(std::span<const double> x, double deadband) {
  if (!(deadband >= 0.0)) throw Error(ErrorCode::BadWindow, "deadband must be >= 0");
  int count = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const int a = sign(x[i - 1]);
    const int b = sign(x[i]);
    if (a != 0 && b != 0 && a != b && std::abs(x[i] - x[i - 1]) > deadband) ++count;
  }
  return count;
}

double mav(const EmgWindow& window, int channel) { return mav(window.channel(channel)); }
double rms(const EmgWindow& window, int channel) { return rms(window.channel(channel)); }
double waveform_length(const EmgWindow& window, int channel) {
  return waveform_length(window.channel(channel));
}
int zero_crossings(const EmgWindow& window, int channel, double deadband) {
  return zero_crossings(window.channel(channel), deadband);
}

std::string_view to_string(Feature f) noexcept {
  switch (f) {
    case Feature::Mav: return "mav";
    case Feature::Rms: return "rms";
    case Feature::WaveformLength: return "wl";
    case Feature::ZeroCrossings: return "zc";
  }
  return "?";
}

std::optional<Feature> parse_feature(std::string_view name) noexcept {
  for (auto f : {Feature::Mav, Feature::Rms, Feature::WaveformLength, Feature::ZeroCrossings}) {
    if (iequals(name, to_string(f))) return f;
  }
  return std::nullopt;
}

std::string FeatureConfig::id() const {
  std::ostringstream os;
  os << "sr" << sample_rate_hz << "-w" << window_ms << "-s" << step_ms << '-';
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) os << '+';
    os << to_string(features[i]);
  }
  os.precision(17);
  os << "-db" << zc_deadband;
  return os.str();
}

void FeatureConfig::validate() const {
  check_lengths(window_ms, step_ms, sample_rate_hz);
  if (features.empty()) throw Error(ErrorCode::BadWindow, "no features enabled");
  if (!(zc_deadband >= 0.0)) throw Error(ErrorCode::BadWindow, "zc_deadband must be >= 0");
}

void require_conforms(const EmgWindow& window, const FeatureConfig& config) {
  if (window.sample_rate_hz() != config.sample_rate_hz || window.window_len_ms() != config.window_ms ||
      window.step_ms() != config.step_ms) {
    throw Error(ErrorCode::MalformedStream, "window settings do not match feature config " +
                                                config.id());
  }
}

FeatureVector featurize(const EmgWindow& window, const FeatureConfig& config) {
  require_conforms(window, config);
  FeatureVector fv;
  fv.feature_config_id = config.id();
  fv.values.reserve(config.dimension());
  for (int ch = 0; ch < kChannels; ++ch) {
    const auto x = window.channel(ch);
    for (auto f : config.features) {
      switch (f) {
        case Feature::Mav: fv.values.push_back(mav(x)); break;
        case Feature::Rms: fv.values.push_back(rms(x)); break;
        case Feature::WaveformLength: fv.values.push_back(waveform_length(x)); break;
        case Feature::ZeroCrossings:
          fv.values.push_back(static_cast<double>(zero_crossings(x, config.zc_deadband)));
          break;
      }
    }
  }
  return fv;
}

}  // namespace rehab::emg
