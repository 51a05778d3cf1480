#include <cmath>
#include <limits>

#include "tcsf/common.hpp"
#include "tcsf/nn.hpp"

namespace tcsf::nn {

Param::Param(std::string n, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(n)),
      value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)),
      adam_m(Matrix::Zero(rows, cols)),
      adam_v(Matrix::Zero(rows, cols)) {}

std::vector<Tap> causal_taps(int rows_up, int half_width, bool include_center) {
  std::vector<Tap> taps;
  for (int dy = -rows_up; dy <= -1; ++dy) {
    for (int dx = -half_width; dx <= half_width; ++dx) taps.push_back({dy, dx});
  }
  for (int dx = -half_width; dx <= (include_center ? 0 : -1); ++dx) taps.push_back({0, dx});
  return taps;
}

std::vector<Tap> centered_taps(int half_height, int half_width) {
  std::vector<Tap> taps;
  for (int dy = -half_height; dy <= half_height; ++dy) {
    for (int dx = -half_width; dx <= half_width; ++dx) taps.push_back({dy, dx});
  }
  return taps;
}

void init_uniform(Param& p, Rng& rng, double bound) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = bound * (2.0 * uniform_open(rng) - 1.0);
  }
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) p->zero_grad();
}

std::size_t count_parameters(const std::vector<Param*>& params) {
  std::size_t n = 0;
  for (const Param* p : params) n += static_cast<std::size_t>(p->value.size());
  return n;
}

// ---- Conv2d ------------------------------------------------------------------

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, std::vector<Tap> taps)
    : weight(name + ".weight", static_cast<Eigen::Index>(taps.size()) * in_channels, out_channels),
      bias(name + ".bias", 1, out_channels),
      in_(in_channels),
      out_(out_channels),
      taps_(std::move(taps)) {
  if (taps_.empty()) throw Error(ErrorCode::invalid_argument, name + ": convolution needs at least one tap");
}

void Conv2d::init(Rng& rng, double gain) {
  const double fan_in = static_cast<double>(taps_.size()) * in_;
  init_uniform(weight, rng, gain * std::sqrt(3.0 / fan_in));
  bias.value.setZero();
}

Matrix Conv2d::forward(const Matrix& in, GridShape shape) {
  if (in.rows() != shape.size() || in.cols() != in_) {
    throw Error(ErrorCode::shape, weight.name + ": input shape mismatch");
  }
  shape_ = shape;
  in_rows_ = in.rows();
  const Eigen::Index taps = static_cast<Eigen::Index>(taps_.size());
  cols_.setZero(in.rows(), taps * in_);
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const Eigen::Index p = static_cast<Eigen::Index>(y) * shape.width + x;
      for (Eigen::Index t = 0; t < taps; ++t) {
        const int sy = y + taps_[t].dy;
        const int sx = x + taps_[t].dx;
        if (sy < 0 || sy >= shape.height || sx < 0 || sx >= shape.width) continue;
        cols_.row(p).segment(t * in_, in_) = in.row(static_cast<Eigen::Index>(sy) * shape.width + sx);
      }
    }
  }
  Matrix out = cols_ * weight.value;
  out.rowwise() += bias.value.row(0);
  return out;
}

Matrix Conv2d::backward(const Matrix& grad_out) {
  weight.grad.noalias() += cols_.transpose() * grad_out;
  bias.grad.row(0) += grad_out.colwise().sum();
  const Matrix dcols = grad_out * weight.value.transpose();
  Matrix din = Matrix::Zero(in_rows_, in_);
  const Eigen::Index taps = static_cast<Eigen::Index>(taps_.size());
  for (int y = 0; y < shape_.height; ++y) {
    for (int x = 0; x < shape_.width; ++x) {
      const Eigen::Index p = static_cast<Eigen::Index>(y) * shape_.width + x;
      for (Eigen::Index t = 0; t < taps; ++t) {
        const int sy = y + taps_[t].dy;
        const int sx = x + taps_[t].dx;
        if (sy < 0 || sy >= shape_.height || sx < 0 || sx >= shape_.width) continue;
        din.row(static_cast<Eigen::Index>(sy) * shape_.width + sx) += dcols.row(p).segment(t * in_, in_);
      }
    }
  }
  return din;
}

void Conv2d::forward_at(const Matrix& in, GridShape shape, int pos, Eigen::Ref<RowVector> out) const {
  const int y = pos / shape.width;
  const int x = pos % shape.width;
  out = bias.value.row(0);
  for (std::size_t t = 0; t < taps_.size(); ++t) {
    const int sy = y + taps_[t].dy;
    const int sx = x + taps_[t].dx;
    if (sy < 0 || sy >= shape.height || sx < 0 || sx >= shape.width) continue;
    out.noalias() += in.row(static_cast<Eigen::Index>(sy) * shape.width + sx) *
                     weight.value.middleRows(static_cast<Eigen::Index>(t) * in_, in_);
  }
}

// ---- Linear ------------------------------------------------------------------

Linear::Linear(std::string name, int in_features, int out_features)
    : weight(name + ".weight", in_features, out_features), bias(name + ".bias", 1, out_features) {}

void Linear::init(Rng& rng, double gain) {
  init_uniform(weight, rng, gain * std::sqrt(3.0 / static_cast<double>(weight.value.rows())));
  bias.value.setZero();
}

Matrix Linear::forward(const Matrix& in) {
  if (in.cols() != weight.value.rows()) throw Error(ErrorCode::shape, weight.name + ": input width mismatch");
  input_ = in;
  Matrix out = in * weight.value;
  out.rowwise() += bias.value.row(0);
  return out;
}

Matrix Linear::backward(const Matrix& grad_out) {
  weight.grad.noalias() += input_.transpose() * grad_out;
  bias.grad.row(0) += grad_out.colwise().sum();
  return grad_out * weight.value.transpose();
}

void Linear::forward_row(const Eigen::Ref<const RowVector>& in, Eigen::Ref<RowVector> out) const {
  out = bias.value.row(0);
  out.noalias() += in * weight.value;
}

// ---- Elu ---------------------------------------------------------------------

Matrix Elu::forward(const Matrix& in) {
  input_ = in;
  return in.unaryExpr([](double v) { return elu(v); });
}

Matrix Elu::backward(const Matrix& grad_out) const {
  return grad_out.cwiseProduct(input_.unaryExpr([](double v) { return elu_grad(v); }));
}

// ---- MaxPool2 ----------------------------------------------------------------

Matrix MaxPool2::forward(const Matrix& in, GridShape shape) {
  if (in.rows() != shape.size()) throw Error(ErrorCode::shape, "maxpool: input shape mismatch");
  in_shape_ = shape;
  in_rows_ = in.rows();
  out_shape_ = {shape.height / 2, shape.width / 2};
  if (out_shape_.size() == 0) throw Error(ErrorCode::shape, "maxpool: input smaller than 2x2");
  const Eigen::Index c = in.cols();
  Matrix out(out_shape_.size(), c);
  argmax_.assign(static_cast<std::size_t>(out.size()), 0);
  for (int y = 0; y < out_shape_.height; ++y) {
    for (int x = 0; x < out_shape_.width; ++x) {
      const Eigen::Index o = static_cast<Eigen::Index>(y) * out_shape_.width + x;
      for (Eigen::Index ch = 0; ch < c; ++ch) {
        double best = -std::numeric_limits<double>::infinity();
        Eigen::Index arg = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const Eigen::Index src = static_cast<Eigen::Index>(2 * y + dy) * shape.width + 2 * x + dx;
            if (in(src, ch) > best) {
              best = in(src, ch);
              arg = src;
            }
          }
        }
        out(o, ch) = best;
        argmax_[static_cast<std::size_t>(o * c + ch)] = arg;
      }
    }
  }
  return out;
}

Matrix MaxPool2::backward(const Matrix& grad_out) const {
  const Eigen::Index c = grad_out.cols();
  Matrix din = Matrix::Zero(in_rows_, c);
  for (Eigen::Index o = 0; o < grad_out.rows(); ++o) {
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      din(argmax_[static_cast<std::size_t>(o * c + ch)], ch) += grad_out(o, ch);
    }
  }
  return din;
}

}  // namespace tcsf::nn
