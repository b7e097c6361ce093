// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rehab/emg/gesture.hpp"

namespace rehab::emg {

inline constexpr int kChannels = 8;
inline constexpr int kDefaultSampleRateHz = 200;

struct EmgFrame {
  std::int64_t timestamp_us = 0;
  std::array<std::int8_t, kChannels> channels{};

  bool operator==(const EmgFrame&) const = default;
};

/// Builds a frame from loosely typed input. Throws MalformedStream unless there are
/// exactly eight values, each within the signed 8-bit range.
EmgFrame make_frame(std::int64_t timestamp_us, std::span<const int> values);

/// A fixed-length run of frames. Construction enforces W = window_len_ms * rate / 1000,
/// W >= 2 and strictly increasing timestamps.
class EmgWindow {
 public:
  EmgWindow(std::vector<EmgFrame> frames, int window_len_ms, int step_ms,
            int sample_rate_hz = kDefaultSampleRateHz);

  const std::vector<EmgFrame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  int window_len_ms() const noexcept { return window_len_ms_; }
  int step_ms() const noexcept { return step_ms_; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::int64_t start_us() const noexcept { return frames_.front().timestamp_us; }
  std::int64_t end_us() const noexcept { return frames_.back().timestamp_us; }

  /// Samples of one channel as reals. Throws BadChannel outside [0, 8).
  std::vector<double> channel(int channel) const;

  bool operator==(const EmgWindow&) const = default;

 private:
  std::vector<EmgFrame> frames_;
  int window_len_ms_;
  int step_ms_;
  int sample_rate_hz_;
};

/// Number of frames spanning `ms` at `sample_rate_hz`.
constexpr int frames_for(int ms, int sample_rate_hz) { return ms * sample_rate_hz / 1000; }

/// Cuts a stream into windows of window_len_ms advancing by step_ms. A trailing partial
/// window is dropped. Throws MalformedStream on non-increasing timestamps and BadWindow on
/// invalid lengths.
std::vector<EmgWindow> slide_windows(std::span<const EmgFrame> stream, int window_len_ms,
                                     int step_ms, int sample_rate_hz = kDefaultSampleRateHz);

/// Incremental form of slide_windows for live streams; yields the same windows.
class Windower {
 public:
  Windower(int window_len_ms, int step_ms, int sample_rate_hz = kDefaultSampleRateHz);

  std::optional<EmgWindow> push(const EmgFrame& frame);
  void reset();

 private:
  int window_len_ms_;
  int step_ms_;
  int sample_rate_hz_;
  std::size_t window_frames_;
  std::size_t step_frames_;
  std::deque<EmgFrame> buffer_;
  std::size_t since_emit_ = 0;
  bool emitted_ = false;
  std::optional<std::int64_t> last_ts_;
};

// Time-domain features over real-valued samples.
double mav(std::span<const double> x);
double rms(std::span<const double> x);
double waveform_length(std::span<const double> x);
int zero_crossings(std::span<const double> x, double deadband);

double mav(const EmgWindow& window, int channel);
double rms(const EmgWindow& window, int channel);
double waveform_length(const EmgWindow& window, int channel);
int zero_crossings(const EmgWindow& window, int channel, double deadband);

enum class Feature : std::uint8_t { Mav, Rms, WaveformLength, ZeroCrossings };

std::string_view to_string(Feature f) noexcept;
std::optional<Feature> parse_feature(std::string_view name) noexcept;

struct FeatureConfig {
  int sample_rate_hz = kDefaultSampleRateHz;
  int window_ms = 200;
  int step_ms = 50;
  std::vector<Feature> features = {Feature::Mav, Feature::Rms, Feature::WaveformLength,
                                   Feature::ZeroCrossings};
  double zc_deadband = 2.0;

  /// Stable identifier of the extraction settings; vectors are only comparable when
  /// their ids match.
  std::string id() const;
  std::size_t dimension() const noexcept { return kChannels * features.size(); }
  int window_frames() const noexcept { return frames_for(window_ms, sample_rate_hz); }

  /// Throws BadWindow for settings no window could satisfy.
  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::string feature_config_id;

  bool operator==(const FeatureVector&) const = default;
};

/// Channel-major concatenation [f1(ch0), f2(ch0), ..., f1(ch1), ...].
FeatureVector featurize(const EmgWindow& window, const FeatureConfig& config);

/// Throws MalformedStream when the window was cut with different settings.
void require_conforms(const EmgWindow& window, const FeatureConfig& config);

}  // namespace rehab::emg
