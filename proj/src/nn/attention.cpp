#include <cmath>

#include "tcsf/common.hpp"
#include "tcsf/nn.hpp"

namespace tcsf::nn {

CausalSelfAttention::CausalSelfAttention(std::string name, int channels, int heads)
    : wq(name + ".wq", channels, channels),
      wk(name + ".wk", channels, channels),
      wv(name + ".wv", channels, channels),
      wo(name + ".wo", channels, channels),
      bo(name + ".bo", 1, channels),
      channels_(channels),
      heads_(heads) {
  if (heads <= 0 || channels % heads != 0) {
    throw Error(ErrorCode::invalid_argument, name + ": channels must be a multiple of heads");
  }
  head_dim_ = channels / heads;
}

void CausalSelfAttention::init(Rng& rng, double output_gain) {
  const double bound = std::sqrt(3.0 / channels_);
  init_uniform(wq, rng, bound);
  init_uniform(wk, rng, bound);
  init_uniform(wv, rng, bound);
  init_uniform(wo, rng, output_gain * bound);
  bo.value.setZero();
}

Matrix CausalSelfAttention::forward(const Matrix& h) {
  if (h.cols() != channels_) throw Error(ErrorCode::shape, wq.name + ": input width mismatch");
  const Eigen::Index n = h.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  input_ = h;
  q_ = h * wq.value;
  k_ = h * wk.value;
  v_ = h * wv.value;
  o_.setZero(n, channels_);
  probs_.resize(static_cast<std::size_t>(heads_));
  for (int hd = 0; hd < heads_; ++hd) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(hd) * head_dim_;
    // Only the lower triangle of p is meaningful; every later use goes
    // through triangularView.
    Matrix& p = probs_[static_cast<std::size_t>(hd)];
    p.resize(n, n);
    p.noalias() = q_.middleCols(c0, head_dim_) * k_.middleCols(c0, head_dim_).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      auto row = p.row(i).head(i + 1);
      row *= scale;
      const double m = row.maxCoeff();
      row = (row.array() - m).exp();
      row /= row.sum();
    }
    o_.middleCols(c0, head_dim_).noalias() = p.triangularView<Eigen::Lower>() * v_.middleCols(c0, head_dim_);
  }
  Matrix out = o_ * wo.value;
  out.rowwise() += bo.value.row(0);
  return out;
}

Matrix CausalSelfAttention::backward(const Matrix& grad_out) {
  const Eigen::Index n = grad_out.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  wo.grad.noalias() += o_.transpose() * grad_out;
  bo.grad.row(0) += grad_out.colwise().sum();
  const Matrix go = grad_out * wo.value.transpose();
  Matrix dq = Matrix::Zero(n, channels_);
  Matrix dk = Matrix::Zero(n, channels_);
  Matrix dv = Matrix::Zero(n, channels_);
  Matrix& ds = scratch_;
  ds.resize(n, n);
  for (int hd = 0; hd < heads_; ++hd) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(hd) * head_dim_;
    const Matrix& p = probs_[static_cast<std::size_t>(hd)];
    const auto goh = go.middleCols(c0, head_dim_);
    dv.middleCols(c0, head_dim_).noalias() = p.triangularView<Eigen::Lower>().transpose() * goh;
    ds.noalias() = goh * v_.middleCols(c0, head_dim_).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      auto prow = p.row(i).head(i + 1);
      auto drow = ds.row(i).head(i + 1);
      const double dot = prow.dot(drow);
      drow = (prow.array() * (drow.array() - dot) * scale).matrix();
    }
    dq.middleCols(c0, head_dim_).noalias() = ds.triangularView<Eigen::Lower>() * k_.middleCols(c0, head_dim_);
    dk.middleCols(c0, head_dim_).noalias() =
        ds.triangularView<Eigen::Lower>().transpose() * q_.middleCols(c0, head_dim_);
  }
  wq.grad.noalias() += input_.transpose() * dq;
  wk.grad.noalias() += input_.transpose() * dk;
  wv.grad.noalias() += input_.transpose() * dv;
  Matrix dh = dq * wq.value.transpose();
  dh.noalias() += dk * wk.value.transpose();
  dh.noalias() += dv * wv.value.transpose();
  return dh;
}

void CausalSelfAttention::forward_at(const Matrix& h, int pos, Matrix& keys, Matrix& values,
                                     Eigen::Ref<RowVector> out) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  const auto hrow = h.row(pos);
  keys.row(pos).noalias() = hrow * wk.value;
  values.row(pos).noalias() = hrow * wv.value;
  const RowVector q = hrow * wq.value;
  RowVector o(channels_);
  Eigen::VectorXd scores(pos + 1);
  for (int hd = 0; hd < heads_; ++hd) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(hd) * head_dim_;
    scores.noalias() = keys.block(0, c0, pos + 1, head_dim_) * q.segment(c0, head_dim_).transpose();
    scores *= scale;
    const double m = scores.maxCoeff();
    scores = (scores.array() - m).exp();
    scores /= scores.sum();
    o.segment(c0, head_dim_).noalias() = scores.transpose() * values.block(0, c0, pos + 1, head_dim_);
  }
  out = bo.value.row(0);
  out.noalias() += o * wo.value;
}

}  // namespace tcsf::nn
