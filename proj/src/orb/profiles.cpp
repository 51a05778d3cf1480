#include <cmath>

#include "tcsf/common.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

std::optional<Quadrant> quadrant_of(long east, long north) {
  if (east == 0 && north == 0) return std::nullopt;
  if (east > 0 && north >= 0) return Quadrant::NE;
  if (east <= 0 && north > 0) return Quadrant::NW;
  if (east < 0 && north <= 0) return Quadrant::SW;
  return Quadrant::SE;
}

namespace {

void fill_gaps(std::array<double, kRadialBins>& values, const std::array<int, kRadialBins>& counts) {
  int prev = -1;
  for (int k = 0; k < kRadialBins; ++k) {
    if (counts[k] == 0) continue;
    if (prev < 0) {
      for (int j = 0; j < k; ++j) values[j] = values[k];
    } else {
      for (int j = prev + 1; j < k; ++j) {
        const double w = static_cast<double>(j - prev) / static_cast<double>(k - prev);
        values[j] = values[prev] + w * (values[k] - values[prev]);
      }
    }
    prev = k;
  }
  for (int j = prev + 1; j < kRadialBins; ++j) values[j] = values[prev];
}

}  // namespace

RadialProfileSet compute_radial_profiles(const BrightnessStamp& stamp) {
  if (stamp.grid.size() != stamp.rows * stamp.cols) throw Error(ErrorCode::shape, "stamp grid size mismatch");
  if (stamp.coverage_radius_km() < kProfileRadiusKm) {
    throw Error(ErrorCode::domain, "stamp covers " + std::to_string(stamp.coverage_radius_km()) +
                                       " km radius, need 400 km");
  }
  RadialProfileSet out;
  out.time = stamp.time;
  ProfileGrid sums{};
  const long reach = static_cast<long>(std::ceil(kProfileRadiusKm / stamp.pixel_km));
  const long cr = static_cast<long>(stamp.center_row);
  const long cc = static_cast<long>(stamp.center_col);
  for (long dr = -reach; dr <= reach; ++dr) {
    const long r = cr + dr;
    if (r < 0 || r >= static_cast<long>(stamp.rows)) continue;
    for (long dc = -reach; dc <= reach; ++dc) {
      const long c = cc + dc;
      if (c < 0 || c >= static_cast<long>(stamp.cols)) continue;
      const auto q = quadrant_of(dc, -dr);  // first row is northernmost
      if (!q) continue;
      const double dist = stamp.pixel_km * std::sqrt(static_cast<double>(dr * dr + dc * dc));
      const auto bin = static_cast<long>(std::floor(dist / kBinWidthKm));
      if (bin >= kRadialBins) continue;
      const float v = stamp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      if (!std::isfinite(v)) continue;
      const int qi = static_cast<int>(*q);
      sums[qi][bin] += v;
      out.valid_counts[qi][bin] += 1;
    }
  }
  for (int q = 0; q < kQuadrants; ++q) {
    bool any = false;
    for (int k = 0; k < kRadialBins; ++k) {
      if (out.valid_counts[q][k] > 0) {
        out.values[q][k] = sums[q][k] / out.valid_counts[q][k];
        any = true;
      }
    }
    if (!any) {
      throw Error(ErrorCode::domain, std::string("quadrant has no valid pixels: ") + kQuadrantNames[q]);
    }
    fill_gaps(out.values[q], out.valid_counts[q]);
  }
  return out;
}

}  // namespace tcsf
