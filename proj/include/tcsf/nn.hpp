#pragma once

// Small dense neural-network toolkit: layers with explicit forward/backward
// passes over row-major activation matrices (one row per grid position, one
// column per channel).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tcsf/rng.hpp"

namespace tcsf::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols);
  void zero_grad() { grad.setZero(); }
};

struct GridShape {
  int height = 0;
  int width = 0;
  int size() const { return height * width; }
};

// Kernel tap offset: dy rows down, dx columns right of the output position.
struct Tap {
  int dy = 0;
  int dx = 0;
};

// Taps for a raster-causal kernel: rows -rows_up..-1 at full width, plus the
// current row to the left of centre (and the centre itself if include_center).
std::vector<Tap> causal_taps(int rows_up, int half_width, bool include_center);
// Ordinary centred kernel of (2*half_height+1) x (2*half_width+1).
std::vector<Tap> centered_taps(int half_height, int half_width);

void init_uniform(Param& p, Rng& rng, double bound);

// 2-D convolution over an explicit tap list with zero padding; masking is
// expressed by which taps exist.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, std::vector<Tap> taps);

  void init(Rng& rng, double gain = 1.0);
  Matrix forward(const Matrix& in, GridShape shape);
  Matrix backward(const Matrix& grad_out);
  // Output row for one position, reading only the tap neighbourhood of `in`.
  void forward_at(const Matrix& in, GridShape shape, int pos, Eigen::Ref<RowVector> out) const;

  std::vector<Param*> params() { return {&weight, &bias}; }
  const std::vector<Tap>& taps() const { return taps_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

  Param weight;  // (taps * in) x out, tap-major
  Param bias;    // 1 x out

 private:
  int in_ = 0;
  int out_ = 0;
  std::vector<Tap> taps_;
  GridShape shape_;
  Matrix cols_;
  Eigen::Index in_rows_ = 0;
};

// Fully connected layer / 1x1 convolution.
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features);

  void init(Rng& rng, double gain = 1.0);
  Matrix forward(const Matrix& in);
  Matrix backward(const Matrix& grad_out);
  void forward_row(const Eigen::Ref<const RowVector>& in, Eigen::Ref<RowVector> out) const;

  std::vector<Param*> params() { return {&weight, &bias}; }

  Param weight;  // in x out
  Param bias;    // 1 x out

 private:
  Matrix input_;
};

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

class Elu {
 public:
  Matrix forward(const Matrix& in);
  Matrix backward(const Matrix& grad_out) const;

 private:
  Matrix input_;
};

// 2x2 max pooling with stride 2 (floor of odd sizes).
class MaxPool2 {
 public:
  Matrix forward(const Matrix& in, GridShape shape);
  Matrix backward(const Matrix& grad_out) const;
  GridShape out_shape() const { return out_shape_; }

 private:
  GridShape in_shape_;
  GridShape out_shape_;
  Eigen::Index in_rows_ = 0;
  std::vector<Eigen::Index> argmax_;
};

// Multi-head self-attention where position i attends to positions j <= i.
class CausalSelfAttention {
 public:
  CausalSelfAttention() = default;
  CausalSelfAttention(std::string name, int channels, int heads);

  void init(Rng& rng, double output_gain = 0.1);
  Matrix forward(const Matrix& h);
  Matrix backward(const Matrix& grad_out);
  // Incremental evaluation: writes key/value rows for `pos` into `keys` and
  // `values`, then attends over rows 0..pos.
  void forward_at(const Matrix& h, int pos, Matrix& keys, Matrix& values, Eigen::Ref<RowVector> out) const;

  std::vector<Param*> params() { return {&wq, &wk, &wv, &wo, &bo}; }
  int heads() const { return heads_; }

  Param wq, wk, wv, wo, bo;

 private:
  int channels_ = 0;
  int heads_ = 0;
  int head_dim_ = 0;
  Matrix input_, q_, k_, v_, o_, scratch_;
  std::vector<Matrix> probs_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  void step(const std::vector<Param*>& params);
  long steps() const { return t_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  long t_ = 0;
};

void zero_grads(const std::vector<Param*>& params);
std::size_t count_parameters(const std::vector<Param*>& params);

}  // namespace tcsf::nn
