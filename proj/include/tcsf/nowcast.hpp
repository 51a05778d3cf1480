#pragma once

// Current-intensity regression from a 13-row structural trajectory plus
// persistence features. Persistence enters after the convolutional trunk and
// passes only through linear layers, so the output is affine in it.

#include <array>
#include <cstdint>
#include <vector>

#include "tcsf/ingest.hpp"
#include "tcsf/nn.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

inline constexpr int kImageChannels = 6;  // 4 quadrants, radius, row age
inline constexpr int kPersistenceTimes = 5;  // t-30 .. t-6 h every 6 h

struct NowcastFeatureConfig {
  // Intensity changes at every 2-h step t-30..t-6 (13 entries) instead of at
  // the five 6-h times.
  bool thirteen_deltas = false;

  int persistence_size() const { return kPersistenceTimes + (thirteen_deltas ? 13 : kPersistenceTimes); }
  bool operator==(const NowcastFeatureConfig&) const = default;
};

struct NowcastFeatures {
  UtcTime time{};
  // (13 * 80) positions x 6 channels: quadrant temperatures (degC), bin centre
  // radius / 400 km, row age in hours / 24.
  nn::Matrix image;
  // Y(t-30) .. Y(t-6) in kt, then the changes dY(tau) = Y(tau) - Y_ip(tau - 2 h).
  std::vector<double> persistence;
};

// Intensity at `t` from a time-ordered series: the knot value, or linear
// interpolation between the bracketing knots.
std::optional<double> intensity_at(const std::vector<TrackPoint>& series, UtcTime t);

// The 1040 x 6 image: quadrant temperatures plus the coordinate channels.
nn::Matrix nowcast_image(const StructuralTrajectory& traj13);

// `traj13` must have 13 rows ending at t. Throws listing any times the
// intensity series cannot supply.
NowcastFeatures build_features(const StructuralTrajectory& traj13, const std::vector<TrackPoint>& intensity,
                               UtcTime t, const NowcastFeatureConfig& config = {});

// ---- network -----------------------------------------------------------------------

struct NowcastArchitecture {
  std::array<int, 3> conv_channels{16, 32, 64};
  int fc_width = 64;
  int head_width = 32;
  bool operator==(const NowcastArchitecture&) const = default;
};

class NowcastNetwork {
 public:
  NowcastNetwork() = default;
  NowcastNetwork(const NowcastArchitecture& arch, int persistence_size);

  void init(Rng& rng);
  // Inputs already standardised; returns the standardised output.
  double forward(const nn::Matrix& image, const nn::RowVector& persistence);
  // Accumulates parameter gradients; returns input gradients.
  std::pair<nn::Matrix, nn::RowVector> backward(double grad_out);

  std::vector<nn::Param*> params();
  std::vector<const nn::Param*> params() const;
  // Zeroes every weight that acts on the image (the convolutional trunk and
  // the first fully connected layer).
  void zero_trunk();
  const NowcastArchitecture& arch() const { return arch_; }
  int persistence_size() const { return persistence_size_; }

 private:
  NowcastArchitecture arch_;
  int persistence_size_ = 0;
  std::array<nn::Conv2d, 3> conv_;
  std::array<nn::Elu, 3> act_;
  std::array<nn::MaxPool2, 3> pool_;
  nn::Linear fc_;
  nn::Elu fc_act_;
  nn::Linear head1_, head2_;
  std::array<nn::GridShape, 3> shapes_{};
  nn::GridShape final_shape_{};
};

struct NowcastEpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double heldout_mse = 0.0;
};

struct NowcastModel {
  NowcastArchitecture arch;
  NowcastFeatureConfig features;
  NowcastNetwork network;
  std::array<double, kQuadrants> image_mean{};
  std::array<double, kQuadrants> image_std{1.0, 1.0, 1.0, 1.0};
  std::vector<double> persistence_mean;
  std::vector<double> persistence_std;
  double target_mean = 0.0;
  double target_std = 1.0;
  std::vector<NowcastEpochLog> log;
  std::uint64_t seed = 0;
};

inline constexpr double kMinIntensity = 0.0;
inline constexpr double kMaxIntensity = 200.0;

NowcastModel make_nowcast_model(const NowcastArchitecture& arch, const NowcastFeatureConfig& features,
                                std::uint64_t seed);

// Clamped to [0, 200] kt.
double predict_now(const NowcastModel& model, const NowcastFeatures& features);

struct NowcastGradient {
  double value = 0.0;       // clamped prediction
  nn::Matrix image;         // d value / d image (raw units), 1040 x 6
  std::vector<double> persistence;
};
// Gradients are zero when the output clamp is active.
NowcastGradient predict_with_gradient(const NowcastModel& model, const NowcastFeatures& features);

struct NowcastSample {
  NowcastFeatures features;
  double target = 0.0;  // kt
  std::string storm_id;
};

// Every 2-h time with a full 13-row history, persistence coverage and a
// target in the interpolated `intensity` series.
std::vector<NowcastSample> build_nowcast_samples(const std::string& storm_id, const ProfileSeries& profiles,
                                                 const std::vector<TrackPoint>& intensity,
                                                 const NowcastFeatureConfig& config = {});

struct NowcastTrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double clip_norm = 10.0;
};

// Returns the weights with the best held-out MSE at synoptic times (all
// held-out samples if none is synoptic; training MSE if none is held out).
NowcastModel train_nowcast(const std::vector<NowcastSample>& train, const std::vector<NowcastSample>& heldout,
                           const NowcastArchitecture& arch, const NowcastTrainConfig& config,
                           const NowcastFeatureConfig& features, std::uint64_t seed);

double nowcast_mse(const NowcastModel& model, const std::vector<NowcastSample>& samples, bool synoptic_only);

}  // namespace tcsf
