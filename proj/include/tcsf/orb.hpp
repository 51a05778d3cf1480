#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcsf/stamp.hpp"
#include "tcsf/time.hpp"

namespace tcsf {

inline constexpr int kQuadrants = 4;
inline constexpr int kRadialBins = 80;
inline constexpr double kBinWidthKm = 5.0;
inline constexpr double kProfileRadiusKm = kRadialBins * kBinWidthKm;

// Channel order used everywhere: azimuth measured counter-clockwise from east,
// NE=[0,90), NW=[90,180), SW=[180,270), SE=[270,360).
enum class Quadrant { NE = 0, NW = 1, SW = 2, SE = 3 };
inline constexpr std::array<const char*, kQuadrants> kQuadrantNames{"NE", "NW", "SW", "SE"};

// Quadrant of the offset (east, north); the exact centre has none.
std::optional<Quadrant> quadrant_of(long east, long north);

using ProfileGrid = std::array<std::array<double, kRadialBins>, kQuadrants>;
using CountGrid = std::array<std::array<int, kRadialBins>, kQuadrants>;

// Mean brightness temperature per (quadrant, 5-km radial bin).
struct RadialProfileSet {
  UtcTime time{};
  ProfileGrid values{};
  CountGrid valid_counts{};  // 0 marks a gap-filled bin
};

// Pixel-centre binning: a pixel belongs to bin floor(r / 5 km) and the quadrant
// of its offset from the centre. Empty bins are filled by linear interpolation
// along radius within their quadrant.
RadialProfileSet compute_radial_profiles(const BrightnessStamp& stamp);

using ProfileSeries = std::map<UtcTime, RadialProfileSet>;

// Hovmöller stack of profile sets, oldest row first. Storage is
// rows x bins x quadrants, row-major.
class StructuralTrajectory {
 public:
  StructuralTrajectory() = default;
  StructuralTrajectory(int n_observed, int n_simulated, UtcTime anchor_time);

  int rows() const { return n_observed_ + n_simulated_; }
  int n_observed() const { return n_observed_; }
  int n_simulated() const { return n_simulated_; }
  UtcTime anchor_time() const { return anchor_time_; }
  // Valid time of row `row`; rows are 2 h apart and the last observed row is the anchor.
  UtcTime row_time(int row) const;

  double& at(int row, int bin, int quadrant) { return data_[index(row, bin, quadrant)]; }
  double at(int row, int bin, int quadrant) const { return data_[index(row, bin, quadrant)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void set_row(int row, const ProfileGrid& values);
  ProfileGrid row(int row) const;

  // Rows [first, first + count) as a new trajectory with `n_observed` leading
  // rows marked observed; the anchor moves with the slice.
  StructuralTrajectory slice(int first, int count, int n_observed) const;

  bool operator==(const StructuralTrajectory&) const = default;

 private:
  std::size_t index(int row, int bin, int quadrant) const {
    return (static_cast<std::size_t>(row) * kRadialBins + bin) * kQuadrants + quadrant;
  }

  int n_observed_ = 0;
  int n_simulated_ = 0;
  UtcTime anchor_time_{};
  std::vector<double> data_;
};

inline constexpr int kObservedRows = 13;  // t-24h .. t at 2 h
inline constexpr int kMaxSimulatedRows = 6;

// The 13 profile sets t-24h..t stacked oldest first.
StructuralTrajectory assemble_trajectory(const ProfileSeries& profiles, UtcTime t,
                                         int n_rows = kObservedRows);

// Unweighted mean over the four quadrants: rows x bins, row-major.
std::vector<double> azimuthal_mean(const StructuralTrajectory& traj);

// ---- archive ---------------------------------------------------------------

struct StormProfiles {
  std::string storm_id;
  ProfileSeries series;
};

// Columns: storm_id,time,quadrant,bin_index,value_degC,valid_count
void write_profile_csv(std::ostream& out, const std::vector<StormProfiles>& storms);
std::vector<StormProfiles> read_profile_csv(std::istream& in);

// Packed binary archive: `<base>.hdr` listing storms and times, `<base>.bin`
// float32 little-endian values (time, quadrant, bin order) followed by int32
// valid counts.
void store_profile_archive(const std::vector<StormProfiles>& storms, const std::filesystem::path& base);
std::vector<StormProfiles> load_profile_archive(const std::filesystem::path& base);

// ---- rasters ----------------------------------------------------------------

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {255, 255, 255});
  int width() const { return width_; }
  int height() const { return height_; }
  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  Rgb at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  void set(int x, int y, Rgb c);  // clipped
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
  void line(double x0, double y0, double x1, double y1, Rgb c, bool dashed = false);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

// Fixed colour scale for brightness temperature over [-90, 30] degC: cold
// cloud tops are white/magenta, warm surfaces dark. Values outside clamp.
inline constexpr double kColorScaleMin = -90.0;
inline constexpr double kColorScaleMax = 30.0;
Rgb temperature_color(double degc);

struct HovmollerRaster {
  Image cells;                   // one pixel per (row, bin)
  std::optional<int> rule_after; // observed/simulated boundary (row count above the rule)
};

// Quadrant-averaged Hovmöller raster: time downward, radius rightward.
HovmollerRaster hovmoller_raster(const StructuralTrajectory& traj);
// Quadrant `q` only.
HovmollerRaster hovmoller_raster(const StructuralTrajectory& traj, Quadrant q);
// Each cell becomes scale x scale pixels; a black rule separates observed and
// simulated rows.
Image upscale(const HovmollerRaster& raster, int scale);
void render_hovmoller(const StructuralTrajectory& traj, const std::filesystem::path& path, int scale = 6);

}  // namespace tcsf
