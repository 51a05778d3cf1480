#pragma once

// Brute-force per-pixel binning, written independently of the library loop.

#include <cmath>
#include <numbers>

#include "tcsf/orb.hpp"
#include "tcsf/rng.hpp"
#include "tcsf/stamp.hpp"

namespace tcsf::oracle {

struct Binned {
  ProfileGrid mean{};
  CountGrid count{};
};

inline int quadrant_by_angle(double east, double north) {
  const double th = std::atan2(north, east);  // (-pi, pi]
  const double half = std::numbers::pi / 2;
  if (th >= 0.0 && th < half) return 0;   // NE [0, 90)
  if (th >= half && th < std::numbers::pi) return 1;  // NW [90, 180)
  if (th >= -half && th < 0.0) return 3;  // SE [270, 360)
  return 2;                               // SW [180, 270)
}

inline Binned bin_pixels(const BrightnessStamp& s) {
  Binned b;
  ProfileGrid sum{};
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double east = (static_cast<double>(c) - static_cast<double>(s.center_col)) * s.pixel_km;
      const double north = (static_cast<double>(s.center_row) - static_cast<double>(r)) * s.pixel_km;
      if (east == 0.0 && north == 0.0) continue;
      const double dist = std::hypot(east, north);
      const int k = static_cast<int>(dist / kBinWidthKm);
      if (k >= kRadialBins) continue;
      const float v = s.at(r, c);
      if (std::isnan(v)) continue;
      const int q = quadrant_by_angle(east, north);
      sum[q][k] += v;
      b.count[q][k] += 1;
    }
  }
  for (int q = 0; q < kQuadrants; ++q) {
    for (int k = 0; k < kRadialBins; ++k) {
      if (b.count[q][k] > 0) b.mean[q][k] = sum[q][k] / b.count[q][k];
    }
  }
  return b;
}

// Square stamp centred on the middle pixel.
inline BrightnessStamp blank_stamp(int extent = 201, double pixel_km = 4.0) {
  BrightnessStamp s;
  s.storm_id = "AL012001";
  s.time = make_time(2001, 8, 1, 0);
  s.pixel_km = pixel_km;
  s.rows = s.cols = static_cast<std::size_t>(extent);
  s.center_row = s.center_col = static_cast<std::size_t>(extent / 2);
  s.grid.assign(s.rows * s.cols, 0.0f);
  return s;
}

// Smooth random field plus noise and a sprinkling of NaN cells.
inline BrightnessStamp random_stamp(Rng& rng, int extent = 201) {
  BrightnessStamp s = blank_stamp(extent);
  const double a = -80.0 + 30.0 * uniform_open(rng);
  const double b = 40.0 * uniform_open(rng);
  const double phase = 6.28 * uniform_open(rng);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double e = static_cast<double>(c) - s.center_col;
      const double n = static_cast<double>(s.center_row) - r;
      const double rad = std::hypot(e, n) / s.rows;
      double v = a + b * rad + 5.0 * std::cos(std::atan2(n, e) + phase) + standard_normal(rng);
      s.at(r, c) = uniform_open(rng) < 0.01 ? std::nanf("") : static_cast<float>(v);
    }
  }
  return s;
}

// 90 degrees counter-clockwise about the centre (east -> north).
inline BrightnessStamp rotate_ccw(const BrightnessStamp& s) {
  BrightnessStamp out = s;
  const std::size_t cc = s.center_col;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) out.at(r, c) = s.at(c, 2 * cc - r);
  }
  return out;
}

}  // namespace tcsf::oracle
