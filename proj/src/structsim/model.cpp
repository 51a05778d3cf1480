#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

namespace tcsf {

StructSimModel make_structsim_model(const StructSimArchitecture& arch, const ScalingSpec& scaling,
                                    std::uint64_t seed) {
  scaling.validate();
  StructSimModel model;
  model.arch = arch;
  model.scaling = scaling;
  model.seed = seed;
  model.network = StructSimNetwork(arch);
  Rng rng(derive_seed(seed, 0));
  model.network.init(rng);
  return model;
}

LogitWindow to_logit_window(const StructuralTrajectory& traj, const ScalingSpec& scaling) {
  LogitWindow w;
  w.rows = traj.rows();
  w.z.resize(static_cast<Eigen::Index>(w.rows) * kRadialBins, kQuadrants);
  for (int r = 0; r < w.rows; ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) {
        w.z(static_cast<Eigen::Index>(r) * kRadialBins + k, q) = scaling.to_logit(traj.at(r, k, q));
      }
    }
  }
  return w;
}

StructuralTrajectory from_logit_window(const LogitWindow& window, const ScalingSpec& scaling, int n_observed,
                                       UtcTime anchor) {
  StructuralTrajectory traj(n_observed, window.rows - n_observed, anchor);
  for (int r = 0; r < window.rows; ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) {
        traj.at(r, k, q) = scaling.from_logit(window.z(static_cast<Eigen::Index>(r) * kRadialBins + k, q));
      }
    }
  }
  return traj;
}

std::vector<PixelMixture> forward(const StructSimModel& model, const LogitWindow& window) {
  const nn::Matrix raw = model.network.evaluate(window.z, window.rows);
  const int k = model.arch.components;
  std::vector<PixelMixture> out(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index p = 0; p < raw.rows(); ++p) {
    for (int q = 0; q < kQuadrants; ++q) out[p][q] = constrain_mixture(raw.row(p).data() + q * 3 * k, k);
  }
  return out;
}

namespace {

// Sum of -log p over every pixel and quadrant; fills grad_raw when given.
double window_nll_sum(const nn::Matrix& raw, const nn::Matrix& z, int components, nn::Matrix* grad_raw,
                      double grad_scale) {
  const int stride = 3 * components;
  double total = 0.0;
  double g[48];
  for (Eigen::Index p = 0; p < raw.rows(); ++p) {
    for (int q = 0; q < kQuadrants; ++q) {
      total += mixture_nll_and_grad(z(p, q), raw.row(p).data() + q * stride, components, g);
      if (grad_raw) {
        for (int i = 0; i < stride; ++i) (*grad_raw)(p, q * stride + i) = g[i] * grad_scale;
      }
    }
  }
  return total;
}

double dataset_nll(const StructSimNetwork& net, const std::vector<LogitWindow>& windows) {
  if (windows.empty()) throw Error(ErrorCode::invalid_argument, "nll: empty dataset");
  double total = 0.0;
  double count = 0.0;
  for (const auto& w : windows) {
    const nn::Matrix raw = net.evaluate(w.z, w.rows);
    total += window_nll_sum(raw, w.z, net.arch().components, nullptr, 0.0);
    count += static_cast<double>(w.z.size());
  }
  return total / count;
}

std::vector<nn::Matrix> snapshot(const StructSimNetwork& net) {
  std::vector<nn::Matrix> out;
  for (const auto* p : net.params()) out.push_back(p->value);
  return out;
}

StructSimNetwork restore(const StructSimArchitecture& arch, const std::vector<nn::Matrix>& values) {
  StructSimNetwork net(arch);
  const auto ps = net.params();
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = values[i];
  return net;
}

}  // namespace

double nll(const StructSimModel& model, const std::vector<LogitWindow>& windows) {
  return dataset_nll(model.network, windows);
}

double nll_degc(const StructSimModel& model, const std::vector<StructuralTrajectory>& windows) {
  std::vector<LogitWindow> z;
  double jac = 0.0;
  double count = 0.0;
  for (const auto& w : windows) {
    z.push_back(to_logit_window(w, model.scaling));
    for (double v : w.data()) jac += model.scaling.log_jacobian(v);
    count += static_cast<double>(w.data().size());
  }
  return nll(model, z) - jac / count;
}

std::vector<StructuralTrajectory> sliding_windows(const ProfileSeries& series, int rows, int stride) {
  if (rows <= 0 || stride <= 0) throw Error(ErrorCode::invalid_argument, "sliding_windows: rows and stride must be positive");
  std::vector<StructuralTrajectory> out;
  std::vector<UtcTime> run;
  const auto flush = [&] {
    for (std::size_t i = 0; i + rows <= run.size(); i += static_cast<std::size_t>(stride)) {
      const int n_obs = std::min(rows, kObservedRows);
      StructuralTrajectory w(n_obs, rows - n_obs, run[i + n_obs - 1]);
      for (int r = 0; r < rows; ++r) w.set_row(r, series.at(run[i + r]).values);
      out.push_back(std::move(w));
    }
    run.clear();
  };
  for (const auto& [t, set] : series) {
    if (!run.empty() && t - run.back() != kProfileStep) flush();
    run.push_back(t);
  }
  flush();
  return out;
}

StructSimModel train_structsim(const std::vector<StructuralTrajectory>& train,
                               const std::vector<StructuralTrajectory>& heldout,
                               const StructSimArchitecture& arch, const StructSimTrainConfig& config,
                               std::uint64_t seed) {
  arch.validate();
  if (config.batch_size <= 0 || config.epochs < 0) throw Error(ErrorCode::config, "structsim: invalid training config");
  if (train.size() < static_cast<std::size_t>(config.batch_size)) {
    throw Error(ErrorCode::invalid_argument, "structsim: " + std::to_string(train.size()) +
                                                 " training windows, fewer than one batch of " +
                                                 std::to_string(config.batch_size));
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& w : train) {
    if (w.rows() > arch.window_rows) throw Error(ErrorCode::shape, "structsim: training window taller than H_total");
    for (double v : w.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::domain, "structsim: non-finite training value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  StructSimModel model = make_structsim_model(arch, ScalingSpec::fit(lo, hi, config.margin), seed);
  std::vector<LogitWindow> train_z, held_z;
  for (const auto& w : train) train_z.push_back(to_logit_window(w, model.scaling));
  for (const auto& w : heldout) held_z.push_back(to_logit_window(w, model.scaling));

  Rng rng(derive_seed(seed, 1));
  nn::Adam adam({config.learning_rate, 0.9, 0.999, 1e-8, config.clip_norm});
  StructSimNetwork& net = model.network;
  const auto params = net.params();

  const auto held_score = [&](double train_nll) { return held_z.empty() ? train_nll : dataset_nll(net, held_z); };
  const double train0 = dataset_nll(net, train_z);
  double best = held_score(train0);
  model.log.push_back({0, train0, best});
  auto best_values = snapshot(net);

  std::vector<std::size_t> order(train_z.size());
  const int k = arch.components;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double progress = config.epochs > 1 ? (epoch - 1.0) / (config.epochs - 1.0) : 0.0;
    const double f = config.final_lr_fraction + (1.0 - config.final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    adam.set_learning_rate(config.learning_rate * f);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_use = order.size();
    if (config.max_windows_per_epoch > 0) {
      n_use = std::min(n_use, static_cast<std::size_t>(std::max(config.max_windows_per_epoch, config.batch_size)));
    }
    double loss = 0.0;
    double count = 0.0;
    for (std::size_t first = 0; first < n_use; first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last = std::min(n_use, first + static_cast<std::size_t>(config.batch_size));
      nn::zero_grads(params);
      for (std::size_t i = first; i < last; ++i) {
        const LogitWindow& w = train_z[order[i]];
        const nn::Matrix raw = net.forward(w.z, w.rows);
        nn::Matrix grad(raw.rows(), raw.cols());
        const double scale = 1.0 / (static_cast<double>(w.z.size()) * static_cast<double>(last - first));
        loss += window_nll_sum(raw, w.z, k, &grad, scale);
        count += static_cast<double>(w.z.size());
        net.backward(grad);
      }
      adam.step(params);
    }
    const double train_nll = loss / count;
    const double held = held_score(train_nll);
    model.log.push_back({epoch, train_nll, held});
    if (held < best) {
      best = held;
      best_values = snapshot(net);
    }
  }
  model.network = restore(arch, best_values);
  return model;
}

}  // namespace tcsf
