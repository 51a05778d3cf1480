#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcsf/nowcast.hpp"
#include "tcsf/rng.hpp"

namespace tcsf {

inline constexpr std::array<const char*, kImageChannels> kImageChannelNames{"NE", "NW", "SW", "SE", "radius", "age"};

// |dY/dx| in raw input units.
struct SaliencyMap {
  UtcTime time{};
  nn::Matrix image;                 // (13 * 80) x 6
  std::vector<double> persistence;
  std::array<double, kImageChannels> channel_sums{};
  double persistence_sum = 0.0;
};

SaliencyMap gradient_saliency(const NowcastModel& model, const NowcastFeatures& features);

// series[t][c]: subtracts the least-squares line in t from every channel c.
std::vector<std::vector<double>> detrend_channel_saliency(const std::vector<std::vector<double>>& series);

// Per-channel sums of a saliency time series, one row per map.
std::vector<std::vector<double>> channel_saliency_series(const std::vector<SaliencyMap>& maps);

// ---- channel attribution ----------------------------------------------------------

// A coalition player: image channels restricted to rows [row_begin, row_end)
// plus a set of persistence entries.
struct FeatureGroup {
  std::string name;
  std::vector<int> image_channels;
  int row_begin = 0;
  int row_end = kObservedRows;
  std::vector<int> persistence;
};

// Six image channels, the intensity entries and the intensity-change entries.
std::vector<FeatureGroup> default_feature_groups(const NowcastFeatureConfig& config);
// As above with each quadrant split into its first 13 - forecast_rows rows
// (observed) and its last forecast_rows rows (forecast).
std::vector<FeatureGroup> observed_forecast_groups(const NowcastFeatureConfig& config, int forecast_rows);

struct ShapleyBaseline {
  std::array<double, kImageChannels> image{};
  std::vector<double> persistence;
};

// Quadrant and persistence means stored in the model; the coordinate channels
// take their column means in `features`, which are the same for every input.
ShapleyBaseline training_mean_baseline(const NowcastModel& model, const NowcastFeatures& features);
ShapleyBaseline sample_mean_baseline(const std::vector<NowcastSample>& samples);

// `features` with every entry outside `coalition` (a group bit mask) set to the baseline.
NowcastFeatures masked_features(const NowcastFeatures& features, const std::vector<FeatureGroup>& groups,
                                std::uint64_t coalition, const ShapleyBaseline& baseline);

struct ShapleyOptions {
  int n_samples = 64;       // sampled permutations
  bool exhaustive = false;  // exact values over all coalitions (at most 16 groups)
};

struct ShapleyResult {
  std::vector<std::string> names;
  std::vector<double> attributions;
  double value = 0.0;           // Y(x)
  double baseline_value = 0.0;  // Y(baseline)
  double efficiency_residual = 0.0;  // sum(attributions) - (value - baseline_value)
  int permutations = 0;
  int evaluations = 0;
  bool exhaustive = false;
};

ShapleyResult channel_shapley(const NowcastModel& model, const NowcastFeatures& features,
                              const std::vector<FeatureGroup>& groups, const ShapleyBaseline& baseline,
                              const ShapleyOptions& options, Rng& rng);

// ---- reports ----------------------------------------------------------------------

void write_saliency_table(std::ostream& out, const SaliencyMap& map, const NowcastFeatureConfig& config);
void write_shapley_table(std::ostream& out, const ShapleyResult& result);
// One Hovmoller-style panel per quadrant channel, brightness scaled to the map maximum.
void render_saliency(const SaliencyMap& map, const std::filesystem::path& path, int scale = 6);

}  // namespace tcsf
