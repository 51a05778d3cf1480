#include <algorithm>

#include "tcsf/common.hpp"
#include "tcsf/nowcast.hpp"

namespace tcsf {

std::optional<double> intensity_at(const std::vector<TrackPoint>& series, UtcTime t) {
  const auto it = std::lower_bound(series.begin(), series.end(), t,
                                   [](const TrackPoint& p, UtcTime when) { return p.time < when; });
  if (it != series.end() && it->time == t) return it->vmax;
  if (it == series.begin() || it == series.end()) return std::nullopt;
  const TrackPoint& a = *(it - 1);
  const TrackPoint& b = *it;
  if (!a.vmax || !b.vmax) return std::nullopt;
  const double w = hours_between(a.time, t) / hours_between(a.time, b.time);
  return *a.vmax + w * (*b.vmax - *a.vmax);
}

nn::Matrix nowcast_image(const StructuralTrajectory& traj13) {
  if (traj13.rows() != kObservedRows) throw Error(ErrorCode::shape, "nowcast: trajectory must have 13 rows");
  nn::Matrix image(kObservedRows * kRadialBins, kImageChannels);
  for (int r = 0; r < kObservedRows; ++r) {
    const double age = 2.0 * (kObservedRows - 1 - r) / 24.0;
    for (int k = 0; k < kRadialBins; ++k) {
      const Eigen::Index p = static_cast<Eigen::Index>(r) * kRadialBins + k;
      for (int q = 0; q < kQuadrants; ++q) image(p, q) = traj13.at(r, k, q);
      image(p, 4) = (k + 0.5) * kBinWidthKm / kProfileRadiusKm;
      image(p, 5) = age;
    }
  }
  return image;
}

NowcastFeatures build_features(const StructuralTrajectory& traj13, const std::vector<TrackPoint>& intensity,
                               UtcTime t, const NowcastFeatureConfig& config) {
  if (traj13.rows() != kObservedRows) throw Error(ErrorCode::shape, "nowcast: trajectory must have 13 rows");
  if (traj13.row_time(kObservedRows - 1) != t) {
    throw Error(ErrorCode::invalid_argument, "nowcast: trajectory does not end at " + format_iso(t));
  }
  NowcastFeatures f;
  f.time = t;
  f.image = nowcast_image(traj13);

  std::string missing;
  const auto lookup = [&](UtcTime when) {
    const auto v = intensity_at(intensity, when);
    if (!v) missing += (missing.empty() ? "" : ", ") + format_iso(when);
    return v.value_or(0.0);
  };
  for (int h = -30; h <= -6; h += 6) f.persistence.push_back(lookup(t + Hours{h}));
  const int delta_step = config.thirteen_deltas ? 2 : 6;
  for (int h = -30; h <= -6; h += delta_step) f.persistence.push_back(lookup(t + Hours{h}) - lookup(t + Hours{h - 2}));
  if (!missing.empty()) throw Error(ErrorCode::domain, "nowcast: intensity missing at: " + missing);
  return f;
}

std::vector<NowcastSample> build_nowcast_samples(const std::string& storm_id, const ProfileSeries& profiles,
                                                 const std::vector<TrackPoint>& intensity,
                                                 const NowcastFeatureConfig& config) {
  std::vector<NowcastSample> out;
  for (const auto& [t, set] : profiles) {
    const auto target = intensity_at(intensity, t);
    if (!target) continue;
    bool complete = true;
    for (int h = 0; h < kObservedRows && complete; ++h) complete = profiles.count(t - kProfileStep * h) > 0;
    if (!complete) continue;
    try {
      NowcastSample s;
      s.features = build_features(assemble_trajectory(profiles, t), intensity, t, config);
      s.target = *target;
      s.storm_id = storm_id;
      out.push_back(std::move(s));
    } catch (const Error&) {
      // persistence not covered this early in the track
    }
  }
  return out;
}

}  // namespace tcsf
