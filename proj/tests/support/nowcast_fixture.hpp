#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "tcsf/ingest.hpp"
#include "tcsf/nowcast.hpp"

namespace tcsf::fixtures {

inline const UtcTime kNowcastAnchor = make_time(2004, 9, 3, 12);

inline StructuralTrajectory patterned_trajectory(double phase, UtcTime anchor = kNowcastAnchor) {
  StructuralTrajectory t(13, 0, anchor);
  for (int r = 0; r < 13; ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) t.at(r, k, q) = -60.0 + 0.5 * k + 3.0 * std::sin(0.3 * r + 0.2 * q + phase);
    }
  }
  return t;
}

// Evenly spaced knots v0 + slope * hours.
inline std::vector<TrackPoint> linear_series(UtcTime from, int n, int step_h, double v0, double slope_per_h) {
  std::vector<TrackPoint> out;
  for (int i = 0; i < n; ++i) {
    TrackPoint p;
    p.storm_id = "AL092004";
    p.time = from + std::chrono::hours(step_h * i);
    p.vmax = v0 + slope_per_h * step_h * i;
    out.push_back(p);
  }
  return out;
}

inline NowcastArchitecture small_nowcast_arch() {
  NowcastArchitecture a;
  a.conv_channels = {4, 6, 8};
  a.fc_width = 12;
  a.head_width = 8;
  return a;
}

// Untrained weights with standardisation chosen so outputs sit well inside the clamp.
inline NowcastModel live_nowcast_model(std::uint64_t seed, const NowcastFeatureConfig& fc = {}) {
  NowcastModel m = make_nowcast_model(small_nowcast_arch(), fc, seed);
  m.image_mean = {-50.0, -50.0, -50.0, -50.0};
  m.image_std = {10.0, 10.0, 10.0, 10.0};
  m.persistence_mean.assign(m.persistence_mean.size(), 40.0);
  m.persistence_std.assign(m.persistence_std.size(), 10.0);
  m.target_mean = 60.0;
  m.target_std = 15.0;
  return m;
}

inline NowcastFeatures patterned_features(double phase, double slope_per_h = 0.5, const NowcastFeatureConfig& fc = {}) {
  return build_features(patterned_trajectory(phase), linear_series(kNowcastAnchor - std::chrono::hours(48), 9, 6, 40.0, slope_per_h),
                        kNowcastAnchor, fc);
}

}  // namespace tcsf::fixtures
