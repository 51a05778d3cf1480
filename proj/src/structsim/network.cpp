#include <memory>

#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

namespace tcsf {

void StructSimArchitecture::validate() const {
  if (blocks < 0 || channels <= 0 || components <= 0 || components > 16 || window_rows <= kObservedRows ||
      input_rows_up < 1 || input_half_width < 0 || block_half_width < 0) {
    throw Error(ErrorCode::config, "structsim: invalid architecture");
  }
  if (attention && (heads <= 0 || channels % heads != 0)) {
    throw Error(ErrorCode::config, "structsim: channels must be a multiple of attention heads");
  }
}

StructSimNetwork::StructSimNetwork(const StructSimArchitecture& arch) : arch_(arch) {
  arch.validate();
  const int c = arch.channels;
  input_conv_ = nn::Conv2d("input", kQuadrants, c, nn::causal_taps(arch.input_rows_up, arch.input_half_width, false));
  coord_proj_ = nn::Linear("coords", 2, c);
  for (int b = 0; b < arch.blocks; ++b) {
    const std::string name = "block" + std::to_string(b);
    Block block;
    block.conv1 = nn::Conv2d(name + ".conv1", c, c, nn::causal_taps(1, arch.block_half_width, true));
    block.conv2 = nn::Conv2d(name + ".conv2", c, c, nn::causal_taps(1, arch.block_half_width, true));
    if (arch.attention) block.attn = nn::CausalSelfAttention(name + ".attn", c, arch.heads);
    blocks_.push_back(std::move(block));
  }
  head_ = nn::Linear("head", c, outputs_per_position());
  if (arch.linear_skip) {
    skip_ = nn::Conv2d("skip", kQuadrants, outputs_per_position(),
                       nn::causal_taps(arch.input_rows_up, arch.input_half_width, false));
  }
}

void StructSimNetwork::init(Rng& rng) {
  input_conv_.init(rng);
  coord_proj_.init(rng);
  for (auto& b : blocks_) {
    b.conv1.init(rng);
    b.conv2.init(rng, 0.5);
    if (arch_.attention) b.attn.init(rng, 0.1);
  }
  head_.init(rng, 0.1);
  if (arch_.linear_skip) skip_.init(rng, 0.0);
}

std::vector<nn::Param*> StructSimNetwork::params() {
  std::vector<nn::Param*> out;
  const auto add = [&out](std::vector<nn::Param*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  add(input_conv_.params());
  add(coord_proj_.params());
  for (auto& b : blocks_) {
    add(b.conv1.params());
    add(b.conv2.params());
    if (arch_.attention) add(b.attn.params());
  }
  add(head_.params());
  if (arch_.linear_skip) add(skip_.params());
  return out;
}

std::vector<const nn::Param*> StructSimNetwork::params() const {
  const auto ps = const_cast<StructSimNetwork*>(this)->params();
  return {ps.begin(), ps.end()};
}

nn::Matrix StructSimNetwork::coordinates(int rows) const {
  nn::Matrix c(static_cast<Eigen::Index>(rows) * kRadialBins, 2);
  const double row_den = arch_.window_rows - 1;
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      const Eigen::Index p = static_cast<Eigen::Index>(r) * kRadialBins + k;
      c(p, 0) = r / row_den;
      c(p, 1) = k / static_cast<double>(kRadialBins - 1);
    }
  }
  return c;
}

nn::Matrix StructSimNetwork::forward(const nn::Matrix& z, int rows) {
  if (rows <= 0 || rows > arch_.window_rows) throw Error(ErrorCode::shape, "structsim: window taller than H_total");
  if (z.rows() != static_cast<Eigen::Index>(rows) * kRadialBins || z.cols() != kQuadrants) {
    throw Error(ErrorCode::shape, "structsim: window must be rows x 80 x 4");
  }
  const nn::GridShape shape{rows, kRadialBins};
  nn::Matrix h = input_conv_.forward(z, shape);
  h += coord_proj_.forward(coordinates(rows));
  for (auto& b : blocks_) {
    const nn::Matrix e0 = b.act_in.forward(h);
    const nn::Matrix e1 = b.act_mid.forward(b.conv1.forward(e0, shape));
    h += b.conv2.forward(e1, shape);
    if (arch_.attention) h += b.attn.forward(h);
  }
  nn::Matrix raw = head_.forward(act_out_.forward(h));
  if (arch_.linear_skip) raw += skip_.forward(z, shape);
  return raw;
}

void StructSimNetwork::backward(const nn::Matrix& grad_raw) {
  if (arch_.linear_skip) skip_.backward(grad_raw);
  nn::Matrix g = act_out_.backward(head_.backward(grad_raw));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    if (arch_.attention) g += it->attn.backward(g);
    const nn::Matrix ge1 = it->conv2.backward(g);
    const nn::Matrix ge0 = it->conv1.backward(it->act_mid.backward(ge1));
    g += it->act_in.backward(ge0);
  }
  input_conv_.backward(g);
  coord_proj_.backward(g);
}

nn::Matrix StructSimNetwork::evaluate(const nn::Matrix& z, int rows) const {
  // Per-thread scratch network keeps the large attention buffers allocated.
  thread_local std::unique_ptr<StructSimNetwork> scratch;
  if (!scratch || !(scratch->arch_ == arch_)) scratch = std::make_unique<StructSimNetwork>(arch_);
  StructSimNetwork& tmp = *scratch;
  const auto dst = tmp.params();
  const auto src = params();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value = src[i]->value;
  return tmp.forward(z, rows);
}

// ---- incremental evaluation ----------------------------------------------------------

StructSimNetwork::Stepper::Stepper(const StructSimNetwork& net, int rows)
    : net_(&net), shape_{rows, kRadialBins} {
  if (rows <= 0 || rows > net.arch_.window_rows) throw Error(ErrorCode::shape, "structsim: window taller than H_total");
  const Eigen::Index n = shape_.size();
  const Eigen::Index c = net.arch_.channels;
  z = nn::Matrix::Zero(n, kQuadrants);
  coords_ = net.coordinates(rows);
  h0_ = nn::Matrix::Zero(n, c);
  eo_ = nn::Matrix::Zero(n, c);
  blocks_.resize(net.blocks_.size());
  for (auto& s : blocks_) {
    s.e0 = s.e1 = s.hmid = s.hout = nn::Matrix::Zero(n, c);
    if (net.arch_.attention) s.keys = s.values = nn::Matrix::Zero(n, c);
  }
}

void StructSimNetwork::Stepper::step(int pos, Eigen::Ref<nn::RowVector> raw) {
  const StructSimNetwork& net = *net_;
  const Eigen::Index c = net.arch_.channels;
  const auto elu_row = [](const auto& v) { return v.unaryExpr([](double x) { return nn::elu(x); }); };
  nn::RowVector tmp(c);
  net.input_conv_.forward_at(z, shape_, pos, h0_.row(pos));
  net.coord_proj_.forward_row(coords_.row(pos), tmp);
  h0_.row(pos) += tmp;
  const nn::Matrix* hin = &h0_;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    BlockState& s = blocks_[b];
    const Block& blk = net.blocks_[b];
    s.e0.row(pos) = elu_row(hin->row(pos));
    blk.conv1.forward_at(s.e0, shape_, pos, tmp);
    s.e1.row(pos) = elu_row(tmp);
    blk.conv2.forward_at(s.e1, shape_, pos, tmp);
    s.hmid.row(pos) = hin->row(pos) + tmp;
    if (net.arch_.attention) {
      blk.attn.forward_at(s.hmid, pos, s.keys, s.values, tmp);
      s.hout.row(pos) = s.hmid.row(pos) + tmp;
    } else {
      s.hout.row(pos) = s.hmid.row(pos);
    }
    hin = &s.hout;
  }
  eo_.row(pos) = elu_row(hin->row(pos));
  net.head_.forward_row(eo_.row(pos), raw);
  if (net.arch_.linear_skip) {
    nn::RowVector skip(raw.size());
    net.skip_.forward_at(z, shape_, pos, skip);
    raw += skip;
  }
}

}  // namespace tcsf
