// SPDX-License-Identifier: Apache-2.0
// Reference implementations used as test oracles. Written directly from the definitions,
// sharing no code with the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rehab/emg/gesture.hpp"
#include "rehab/store/database.hpp"

namespace rehab::oracle {

inline double mav(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += std::fabs(static_cast<long double>(v));
  return static_cast<double>(s / x.size());
}

inline double rms(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s / x.size()));
}

inline double wl(const std::vector<double>& x) {
  long double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += std::fabs(static_cast<long double>(x[i]) - x[i - 1]);
  return static_cast<double>(s);
}

inline int zc(const std::vector<double>& x, double deadband) {
  int n = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const bool opposite = (x[i] > 0 && x[i + 1] < 0) || (x[i] < 0 && x[i + 1] > 0);
    if (opposite && std::fabs(x[i] - x[i + 1]) > deadband) ++n;
  }
  return n;
}

/// Standardized distance computed in long double.
inline long double distance(const std::vector<double>& fv, const store::GestureTemplate& t) {
  long double acc = 0;
  for (std::size_t j = 0; j < fv.size(); ++j) {
    const long double s = t.sigma[j] < 1e-6 ? 1e-6L : static_cast<long double>(t.sigma[j]);
    const long double z = (static_cast<long double>(fv[j]) - t.centroid.values[j]) / s;
    acc += z * z;
  }
  return std::sqrt(acc / fv.size());
}

struct Scan {
  emg::GestureLabel label = emg::GestureLabel::Unknown;
  long double distance = 0;
};

/// Full scan over every template, ties to the lowest label in enumeration order.
inline Scan classify(const std::vector<double>& fv, const store::TemplateDatabase& db, double threshold) {
  const emg::GestureLabel order[] = {emg::GestureLabel::Rest, emg::GestureLabel::Fist,
                                     emg::GestureLabel::FingersSpread, emg::GestureLabel::WaveOut,
                                     emg::GestureLabel::WaveIn};
  std::vector<std::pair<emg::GestureLabel, long double>> all;
  for (auto label : order) {
    auto it = db.templates.find(label);
    if (it != db.templates.end()) all.emplace_back(label, distance(fv, it->second));
  }
  long double best = std::numeric_limits<long double>::infinity();
  for (const auto& [l, d] : all) best = std::min(best, d);
  Scan out{emg::GestureLabel::Unknown, best};
  for (const auto& [l, d] : all) {
    if (d == best) {
      out.label = l;
      break;
    }
  }
  if (best > threshold) out.label = emg::GestureLabel::Unknown;
  return out;
}

/// Population mean and standard deviation, two-pass, long double.
inline std::pair<double, double> mean_sigma(const std::vector<double>& xs) {
  long double m = 0;
  for (double v : xs) m += v;
  m /= xs.size();
  long double var = 0;
  for (double v : xs) var += (v - m) * (v - m);
  var /= xs.size();
  return {static_cast<double>(m), static_cast<double>(std::sqrt(var))};
}

}  // namespace rehab::oracle
