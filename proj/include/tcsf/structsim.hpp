#pragma once

// Autoregressive generative model over structural trajectories. Pixels are
// visited in raster order (rows oldest first, radius increasing); the four
// quadrant values of a pixel form one element with a mixture of logistics per
// quadrant, conditioned on every earlier pixel.

#include <array>
#include <cstdint>
#include <vector>

#include "tcsf/nn.hpp"
#include "tcsf/orb.hpp"
#include "tcsf/rng.hpp"

namespace tcsf {

// ---- scaling -------------------------------------------------------------------

struct ScalingSpec {
  double t_min = -100.0;
  double t_max = 40.0;
  double margin = 5.0;

  // Bounds = [data_min - margin, data_max + margin].
  static ScalingSpec fit(double data_min, double data_max, double margin = 5.0);

  // Throws if T is not strictly inside (t_min, t_max).
  double to_logit(double degc) const;
  // Always strictly inside (t_min, t_max).
  double from_logit(double z) const;
  // log |dz/dT| at T, for converting densities between spaces.
  double log_jacobian(double degc) const;
  void validate() const;
};

// ---- mixture of logistics ----------------------------------------------------------

inline constexpr double kScaleFloor = 1e-3;

struct LogisticMixture {
  std::vector<double> weights;
  std::vector<double> locations;
  std::vector<double> scales;

  int components() const { return static_cast<int>(weights.size()); }
  void validate() const;
};

double mol_logpdf(double z, const LogisticMixture& mix);
double mol_cdf(double z, const LogisticMixture& mix);
double mol_mean(const LogisticMixture& mix);
double mol_sample(const LogisticMixture& mix, Rng& rng);

// Free parameters per pixel for `quadrants` independent K-component mixtures.
inline constexpr int mixture_free_parameters(int components, int quadrants = kQuadrants) {
  return quadrants * (3 * components - 1);
}

// Raw network outputs for one quadrant: K logits, K locations, K scale
// pre-activations. Weights via softmax, scales via softplus + floor.
LogisticMixture constrain_mixture(const double* raw, int components);
// -log p(z) under constrain_mixture(raw) and its gradient with respect to raw.
double mixture_nll_and_grad(double z, const double* raw, int components, double* grad);

using PixelMixture = std::array<LogisticMixture, kQuadrants>;

// ---- network -----------------------------------------------------------------------

struct StructSimArchitecture {
  int blocks = 2;
  int channels = 32;
  int heads = 2;
  int components = 3;
  int window_rows = 19;
  int input_rows_up = 2;
  int input_half_width = 2;
  int block_half_width = 1;
  bool attention = true;
  bool linear_skip = true;  // causal linear map from the input taps straight to the head

  void validate() const;
  bool operator==(const StructSimArchitecture&) const = default;
};

// Logit-space window: one row per raster position (rows * 80), one column per
// quadrant.
struct LogitWindow {
  int rows = 0;
  nn::Matrix z;
};

class StructSimNetwork {
 public:
  StructSimNetwork() = default;
  explicit StructSimNetwork(const StructSimArchitecture& arch);

  void init(Rng& rng);
  const StructSimArchitecture& arch() const { return arch_; }
  int outputs_per_position() const { return kQuadrants * 3 * arch_.components; }

  // Raw head outputs, positions x (quadrant, logits|locations|scales).
  nn::Matrix forward(const nn::Matrix& z, int rows);
  void backward(const nn::Matrix& grad_raw);
  // Forward without touching this object's caches.
  nn::Matrix evaluate(const nn::Matrix& z, int rows) const;

  std::vector<nn::Param*> params();
  std::vector<const nn::Param*> params() const;

  // Position-by-position evaluation with cached activations, used for
  // sampling. Copies share the (immutable) network.
  class Stepper {
   public:
    Stepper(const StructSimNetwork& net, int rows);
    nn::Matrix z;  // positions x quadrants; rows before the current position must be set
    void step(int pos, Eigen::Ref<nn::RowVector> raw);
    int rows() const { return shape_.height; }

   private:
    struct BlockState {
      nn::Matrix e0, e1, hmid, keys, values, hout;
    };
    const StructSimNetwork* net_;
    nn::GridShape shape_;
    nn::Matrix coords_, h0_, eo_;
    std::vector<BlockState> blocks_;
  };

 private:
  nn::Matrix coordinates(int rows) const;

  struct Block {
    nn::Elu act_in, act_mid;
    nn::Conv2d conv1, conv2;
    nn::CausalSelfAttention attn;
  };

  StructSimArchitecture arch_;
  nn::Conv2d input_conv_;
  nn::Linear coord_proj_;
  std::vector<Block> blocks_;
  nn::Elu act_out_;
  nn::Linear head_;
  nn::Conv2d skip_;
};

// ---- model -----------------------------------------------------------------------

struct EpochLog {
  int epoch = 0;
  double train_nll = 0.0;
  double heldout_nll = 0.0;
};

struct StructSimModel {
  StructSimArchitecture arch;
  ScalingSpec scaling;
  StructSimNetwork network;
  std::vector<EpochLog> log;
  std::uint64_t seed = 0;
};

StructSimModel make_structsim_model(const StructSimArchitecture& arch, const ScalingSpec& scaling,
                                    std::uint64_t seed);

LogitWindow to_logit_window(const StructuralTrajectory& traj, const ScalingSpec& scaling);
StructuralTrajectory from_logit_window(const LogitWindow& window, const ScalingSpec& scaling,
                                       int n_observed, UtcTime anchor);

// Mixture parameters for every pixel, raster order.
std::vector<PixelMixture> forward(const StructSimModel& model, const LogitWindow& window);

// Mean negative log-likelihood in nats per pixel and quadrant (logit space).
double nll(const StructSimModel& model, const std::vector<LogitWindow>& windows);
// Same, but as a density over degC.
double nll_degc(const StructSimModel& model, const std::vector<StructuralTrajectory>& windows);

struct StructSimTrainConfig {
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 2e-3;
  double final_lr_fraction = 0.1;  // cosine decay over the epochs to this fraction
  double clip_norm = 10.0;
  int max_windows_per_epoch = 0;  // 0: all
  double margin = 5.0;
};

// Every run of `rows` consecutive 2-h profiles in the series.
std::vector<StructuralTrajectory> sliding_windows(const ProfileSeries& series, int rows = 19, int stride = 1);

// Fits the scaling on `train`, optimises the joint likelihood of every row and
// keeps the weights with the best held-out NLL (train NLL if none held out).
StructSimModel train_structsim(const std::vector<StructuralTrajectory>& train,
                               const std::vector<StructuralTrajectory>& heldout,
                               const StructSimArchitecture& arch, const StructSimTrainConfig& config,
                               std::uint64_t seed);

// ---- sampling -------------------------------------------------------------------

struct SimulationDiagnostics {
  int clamped_values = 0;
};

// Samples `steps` rows after the 13 observed rows.
StructuralTrajectory simulate_completion(const StructSimModel& model, const StructuralTrajectory& observed,
                                         int steps, Rng& rng, SimulationDiagnostics* diag = nullptr);

// Member i uses Rng(derive_seed(master_seed, i)).
std::vector<StructuralTrajectory> ensemble(const StructSimModel& model, const StructuralTrajectory& observed,
                                           int n, int steps, std::uint64_t master_seed,
                                           SimulationDiagnostics* diag = nullptr);

// Element-wise mean of trajectories with identical shape.
StructuralTrajectory mean_trajectory(const std::vector<StructuralTrajectory>& members);

}  // namespace tcsf
