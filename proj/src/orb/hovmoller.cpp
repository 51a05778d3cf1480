#include <algorithm>
#include <array>
#include <cmath>

#include "tcsf/common.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

namespace {

struct ColorStop {
  double degc;
  Rgb color;
};

// Piecewise-linear IR enhancement, coldest first.
constexpr std::array<ColorStop, 8> kStops{{
    {-90.0, {255, 255, 255}},
    {-75.0, {230, 40, 200}},
    {-60.0, {220, 30, 30}},
    {-45.0, {250, 200, 30}},
    {-30.0, {40, 170, 60}},
    {-15.0, {40, 90, 200}},
    {0.0, {130, 130, 130}},
    {30.0, {20, 20, 20}},
}};

unsigned char mix(unsigned char a, unsigned char b, double w) {
  return static_cast<unsigned char>(std::lround(a + w * (static_cast<double>(b) - a)));
}

HovmollerRaster raster_from(const StructuralTrajectory& traj, const std::vector<double>& values) {
  HovmollerRaster out{Image(kRadialBins, traj.rows()), std::nullopt};
  for (int h = 0; h < traj.rows(); ++h) {
    for (int k = 0; k < kRadialBins; ++k) {
      out.cells.at(k, h) = temperature_color(values[static_cast<std::size_t>(h) * kRadialBins + k]);
    }
  }
  if (traj.n_simulated() > 0) out.rule_after = traj.n_observed();
  return out;
}

}  // namespace

Rgb temperature_color(double degc) {
  if (!(degc > kStops.front().degc)) return kStops.front().color;
  if (degc >= kStops.back().degc) return kStops.back().color;
  for (std::size_t i = 1; i < kStops.size(); ++i) {
    if (degc <= kStops[i].degc) {
      const auto& a = kStops[i - 1];
      const auto& b = kStops[i];
      const double w = (degc - a.degc) / (b.degc - a.degc);
      return {mix(a.color.r, b.color.r, w), mix(a.color.g, b.color.g, w), mix(a.color.b, b.color.b, w)};
    }
  }
  return kStops.back().color;
}

HovmollerRaster hovmoller_raster(const StructuralTrajectory& traj) {
  return raster_from(traj, azimuthal_mean(traj));
}

HovmollerRaster hovmoller_raster(const StructuralTrajectory& traj, Quadrant q) {
  std::vector<double> values(static_cast<std::size_t>(traj.rows()) * kRadialBins);
  for (int h = 0; h < traj.rows(); ++h) {
    for (int k = 0; k < kRadialBins; ++k) {
      values[static_cast<std::size_t>(h) * kRadialBins + k] = traj.at(h, k, static_cast<int>(q));
    }
  }
  return raster_from(traj, values);
}

Image upscale(const HovmollerRaster& raster, int scale) {
  if (scale < 1) throw Error(ErrorCode::invalid_argument, "scale must be >= 1");
  Image out(raster.cells.width() * scale, raster.cells.height() * scale);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = raster.cells.at(x / scale, y / scale);
  }
  if (raster.rule_after) {
    const int y = *raster.rule_after * scale;
    const int thickness = std::max(1, scale / 3);
    out.fill_rect(0, y - thickness / 2, out.width() - 1, y - thickness / 2 + thickness - 1, {0, 0, 0});
  }
  return out;
}

void render_hovmoller(const StructuralTrajectory& traj, const std::filesystem::path& path, int scale) {
  write_png(upscale(hovmoller_raster(traj), scale), path);
}

}  // namespace tcsf
