#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "tcsf/common.hpp"
#include "tcsf/nowcast.hpp"

namespace tcsf {

NowcastNetwork::NowcastNetwork(const NowcastArchitecture& arch, int persistence_size)
    : arch_(arch), persistence_size_(persistence_size) {
  int in = kImageChannels;
  nn::GridShape shape{kObservedRows, kRadialBins};
  for (int i = 0; i < 3; ++i) {
    if (arch.conv_channels[i] <= 0) throw Error(ErrorCode::config, "nowcast: channel widths must be positive");
    conv_[i] = nn::Conv2d("conv" + std::to_string(i + 1), in, arch.conv_channels[i], nn::centered_taps(1, 1));
    in = arch.conv_channels[i];
    shapes_[i] = shape;
    shape = {shape.height / 2, shape.width / 2};
  }
  if (arch.fc_width <= 0 || arch.head_width <= 0 || persistence_size <= 0) {
    throw Error(ErrorCode::config, "nowcast: layer widths must be positive");
  }
  final_shape_ = shape;
  fc_ = nn::Linear("fc", shape.size() * in, arch.fc_width);
  head1_ = nn::Linear("head1", arch.fc_width + persistence_size, arch.head_width);
  head2_ = nn::Linear("head2", arch.head_width, 1);
}

void NowcastNetwork::init(Rng& rng) {
  for (auto& c : conv_) c.init(rng);
  fc_.init(rng);
  head1_.init(rng);
  head2_.init(rng);
}

std::vector<nn::Param*> NowcastNetwork::params() {
  std::vector<nn::Param*> out;
  const auto add = [&out](std::vector<nn::Param*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  for (auto& c : conv_) add(c.params());
  add(fc_.params());
  add(head1_.params());
  add(head2_.params());
  return out;
}

std::vector<const nn::Param*> NowcastNetwork::params() const {
  const auto ps = const_cast<NowcastNetwork*>(this)->params();
  return {ps.begin(), ps.end()};
}

void NowcastNetwork::zero_trunk() {
  for (auto& c : conv_) {
    c.weight.value.setZero();
    c.bias.value.setZero();
  }
  fc_.weight.value.setZero();
  fc_.bias.value.setZero();
}

double NowcastNetwork::forward(const nn::Matrix& image, const nn::RowVector& persistence) {
  if (image.rows() != kObservedRows * kRadialBins || image.cols() != kImageChannels) {
    throw Error(ErrorCode::shape, "nowcast: image must be 13 x 80 x 6");
  }
  if (persistence.size() != persistence_size_) throw Error(ErrorCode::shape, "nowcast: persistence size mismatch");
  nn::Matrix x = image;
  for (int i = 0; i < 3; ++i) x = pool_[i].forward(act_[i].forward(conv_[i].forward(x, shapes_[i])), shapes_[i]);
  const nn::Matrix flat = Eigen::Map<const nn::Matrix>(x.data(), 1, x.size());
  const nn::Matrix f = fc_act_.forward(fc_.forward(flat));
  nn::Matrix cat(1, f.cols() + persistence.size());
  cat << f, persistence;
  return head2_.forward(head1_.forward(cat))(0, 0);
}

std::pair<nn::Matrix, nn::RowVector> NowcastNetwork::backward(double grad_out) {
  const nn::Matrix g = nn::Matrix::Constant(1, 1, grad_out);
  const nn::Matrix gcat = head1_.backward(head2_.backward(g));
  const nn::RowVector gpers = gcat.rightCols(persistence_size_);
  const nn::Matrix gflat = fc_.backward(fc_act_.backward(gcat.leftCols(arch_.fc_width)));
  nn::Matrix gx = Eigen::Map<const nn::Matrix>(gflat.data(), final_shape_.size(), arch_.conv_channels[2]);
  for (int i = 2; i >= 0; --i) gx = conv_[i].backward(act_[i].backward(pool_[i].backward(gx)));
  return {gx, gpers};
}

// ---- model -----------------------------------------------------------------------

NowcastModel make_nowcast_model(const NowcastArchitecture& arch, const NowcastFeatureConfig& features,
                                std::uint64_t seed) {
  NowcastModel m;
  m.arch = arch;
  m.features = features;
  m.seed = seed;
  m.network = NowcastNetwork(arch, features.persistence_size());
  Rng rng(derive_seed(seed, 0));
  m.network.init(rng);
  m.persistence_mean.assign(static_cast<std::size_t>(features.persistence_size()), 0.0);
  m.persistence_std.assign(static_cast<std::size_t>(features.persistence_size()), 1.0);
  return m;
}

namespace {

struct StandardInput {
  nn::Matrix image;
  nn::RowVector persistence;
};

StandardInput standardize(const NowcastModel& m, const NowcastFeatures& f) {
  if (static_cast<int>(f.persistence.size()) != m.network.persistence_size()) {
    throw Error(ErrorCode::shape, "nowcast: persistence vector has " + std::to_string(f.persistence.size()) +
                                      " entries, model expects " + std::to_string(m.network.persistence_size()));
  }
  if (f.image.rows() != kObservedRows * kRadialBins || f.image.cols() != kImageChannels) {
    throw Error(ErrorCode::shape, "nowcast: image must be 13 x 80 x 6");
  }
  StandardInput s{f.image, nn::RowVector(f.persistence.size())};
  for (int q = 0; q < kQuadrants; ++q) {
    s.image.col(q) = (s.image.col(q).array() - m.image_mean[q]) / m.image_std[q];
  }
  for (std::size_t i = 0; i < f.persistence.size(); ++i) {
    s.persistence[static_cast<Eigen::Index>(i)] = (f.persistence[i] - m.persistence_mean[i]) / m.persistence_std[i];
  }
  return s;
}

NowcastNetwork& scratch_copy(const NowcastNetwork& net) {
  thread_local std::unique_ptr<NowcastNetwork> scratch;
  if (!scratch || !(scratch->arch() == net.arch()) || scratch->persistence_size() != net.persistence_size()) {
    scratch = std::make_unique<NowcastNetwork>(net.arch(), net.persistence_size());
  }
  const auto dst = scratch->params();
  const auto src = net.params();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value = src[i]->value;
  return *scratch;
}

double unclamped(const NowcastModel& m, double standardized) { return m.target_mean + m.target_std * standardized; }

double clamp_intensity(double v) { return std::clamp(v, kMinIntensity, kMaxIntensity); }

void fit_standardization(NowcastModel& m, const std::vector<NowcastSample>& train) {
  std::array<double, kQuadrants> s{}, s2{};
  double n = 0.0;
  const std::size_t np = m.persistence_mean.size();
  std::vector<double> ps(np, 0.0), ps2(np, 0.0);
  double t = 0.0, t2 = 0.0;
  for (const auto& sample : train) {
    for (int q = 0; q < kQuadrants; ++q) {
      s[q] += sample.features.image.col(q).sum();
      s2[q] += sample.features.image.col(q).squaredNorm();
    }
    n += static_cast<double>(sample.features.image.rows());
    if (sample.features.persistence.size() != np) throw Error(ErrorCode::shape, "nowcast: persistence size mismatch");
    for (std::size_t i = 0; i < np; ++i) {
      ps[i] += sample.features.persistence[i];
      ps2[i] += sample.features.persistence[i] * sample.features.persistence[i];
    }
    t += sample.target;
    t2 += sample.target * sample.target;
  }
  const auto spread = [](double sum, double sq, double count) {
    const double mean = sum / count;
    const double var = std::max(0.0, sq / count - mean * mean);
    return std::pair{mean, var > 1e-12 ? std::sqrt(var) : 1.0};
  };
  for (int q = 0; q < kQuadrants; ++q) std::tie(m.image_mean[q], m.image_std[q]) = spread(s[q], s2[q], n);
  const double count = static_cast<double>(train.size());
  for (std::size_t i = 0; i < np; ++i) std::tie(m.persistence_mean[i], m.persistence_std[i]) = spread(ps[i], ps2[i], count);
  std::tie(m.target_mean, m.target_std) = spread(t, t2, count);
}

}  // namespace

double predict_now(const NowcastModel& model, const NowcastFeatures& features) {
  const StandardInput s = standardize(model, features);
  const double out = unclamped(model, scratch_copy(model.network).forward(s.image, s.persistence));
  if (!std::isfinite(out)) throw Error(ErrorCode::internal, "nowcast: non-finite prediction");
  return clamp_intensity(out);
}

NowcastGradient predict_with_gradient(const NowcastModel& model, const NowcastFeatures& features) {
  const StandardInput s = standardize(model, features);
  NowcastNetwork& net = scratch_copy(model.network);
  const double raw = unclamped(model, net.forward(s.image, s.persistence));
  NowcastGradient g;
  g.value = clamp_intensity(raw);
  g.image = nn::Matrix::Zero(features.image.rows(), features.image.cols());
  g.persistence.assign(features.persistence.size(), 0.0);
  if (raw < kMinIntensity || raw > kMaxIntensity) return g;
  auto [gi, gp] = net.backward(model.target_std);
  for (int q = 0; q < kQuadrants; ++q) gi.col(q) /= model.image_std[q];
  g.image = gi;
  for (std::size_t i = 0; i < g.persistence.size(); ++i) {
    g.persistence[i] = gp[static_cast<Eigen::Index>(i)] / model.persistence_std[i];
  }
  return g;
}

double nowcast_mse(const NowcastModel& model, const std::vector<NowcastSample>& samples, bool synoptic_only) {
  double s = 0.0;
  double n = 0.0;
  for (const auto& sample : samples) {
    if (synoptic_only && !is_synoptic(sample.features.time)) continue;
    const double e = predict_now(model, sample.features) - sample.target;
    s += e * e;
    n += 1.0;
  }
  if (n == 0.0) throw Error(ErrorCode::invalid_argument, "nowcast: no samples to score");
  return s / n;
}

NowcastModel train_nowcast(const std::vector<NowcastSample>& train, const std::vector<NowcastSample>& heldout,
                           const NowcastArchitecture& arch, const NowcastTrainConfig& config,
                           const NowcastFeatureConfig& features, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "nowcast: empty training set");
  if (config.batch_size <= 0 || config.epochs < 0) throw Error(ErrorCode::config, "nowcast: invalid training config");
  NowcastModel model = make_nowcast_model(arch, features, seed);
  fit_standardization(model, train);
  std::vector<StandardInput> inputs;
  std::vector<double> targets;
  for (const auto& s : train) {
    inputs.push_back(standardize(model, s.features));
    targets.push_back((s.target - model.target_mean) / model.target_std);
  }
  const bool any_synoptic = std::any_of(heldout.begin(), heldout.end(),
                                        [](const NowcastSample& s) { return is_synoptic(s.features.time); });
  const auto held_score = [&](double train_mse) {
    return heldout.empty() ? train_mse : nowcast_mse(model, heldout, any_synoptic);
  };

  NowcastNetwork& net = model.network;
  const auto params = net.params();
  nn::Adam adam({config.learning_rate, 0.9, 0.999, 1e-8, config.clip_norm});
  Rng rng(derive_seed(seed, 1));

  const double train0 = nowcast_mse(model, train, false);
  double best = held_score(train0);
  model.log.push_back({0, train0, best});
  std::vector<nn::Matrix> best_values;
  for (const auto* p : params) best_values.push_back(p->value);

  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double sq = 0.0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      nn::zero_grads(params);
      for (std::size_t i = first; i < last; ++i) {
        const std::size_t j = order[i];
        const double out = net.forward(inputs[j].image, inputs[j].persistence);
        const double err = out - targets[j];
        sq += err * err * model.target_std * model.target_std;
        net.backward(2.0 * err / static_cast<double>(last - first));
      }
      adam.step(params);
    }
    const double train_mse = sq / static_cast<double>(order.size());
    const double held = held_score(train_mse);
    model.log.push_back({epoch, train_mse, held});
    if (held < best) {
      best = held;
      for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i]->value;
    }
  }
  NowcastNetwork fresh(arch, features.persistence_size());
  const auto dst = fresh.params();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value = best_values[i];
  model.network = std::move(fresh);
  return model;
}

}  // namespace tcsf
