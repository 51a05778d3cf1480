#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tcsf/time.hpp"

namespace tcsf {

// TC-centred Cartesian grid of cloud-top brightness temperature (degC).
// Row-major, first row northernmost; missing cells are NaN.
struct BrightnessStamp {
  std::string storm_id;
  UtcTime time{};
  double pixel_km = 4.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t center_row = 0;
  std::size_t center_col = 0;
  std::vector<float> grid;

  float at(std::size_t r, std::size_t c) const { return grid[r * cols + c]; }
  float& at(std::size_t r, std::size_t c) { return grid[r * cols + c]; }

  // Distance from the centre to the nearest grid edge pixel, km.
  double coverage_radius_km() const;
};

inline constexpr double kMinStampTemperature = -110.0;
inline constexpr double kMaxStampTemperature = 60.0;

// Checks shape, pixel size and the finite-value range.
void validate_stamp(const BrightnessStamp& stamp);

// Stamp store: `<base>.hdr` text sidecar plus `<base>.bin` raw little-endian
// float32 payload. `path` may name the base or either file.
void store_stamp(const BrightnessStamp& stamp, const std::filesystem::path& path);
BrightnessStamp load_stamp(const std::filesystem::path& path);

}  // namespace tcsf
