#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "tcsf/common.hpp"
#include "tcsf/explain.hpp"

namespace tcsf {

namespace {

std::vector<int> iota_vector(int from, int to) {
  std::vector<int> v(static_cast<std::size_t>(std::max(0, to - from)));
  std::iota(v.begin(), v.end(), from);
  return v;
}

void check_groups(const std::vector<FeatureGroup>& groups, const NowcastFeatures& features) {
  if (groups.empty()) throw Error(ErrorCode::invalid_argument, "shapley: no feature groups");
  if (groups.size() > 64) throw Error(ErrorCode::invalid_argument, "shapley: at most 64 feature groups");
  for (const auto& g : groups) {
    if (g.row_begin < 0 || g.row_end > kObservedRows || g.row_begin > g.row_end) {
      throw Error(ErrorCode::invalid_argument, "shapley: group " + g.name + " has an invalid row range");
    }
    for (int c : g.image_channels) {
      if (c < 0 || c >= kImageChannels) throw Error(ErrorCode::invalid_argument, "shapley: group " + g.name + " channel out of range");
    }
    for (int i : g.persistence) {
      if (i < 0 || i >= static_cast<int>(features.persistence.size())) {
        throw Error(ErrorCode::invalid_argument, "shapley: group " + g.name + " persistence index out of range");
      }
    }
  }
}

}  // namespace

std::vector<FeatureGroup> default_feature_groups(const NowcastFeatureConfig& config) {
  std::vector<FeatureGroup> groups;
  for (int c = 0; c < kImageChannels; ++c) groups.push_back({kImageChannelNames[c], {c}, 0, kObservedRows, {}});
  groups.push_back({"Y", {}, 0, 0, iota_vector(0, kPersistenceTimes)});
  groups.push_back({"dY", {}, 0, 0, iota_vector(kPersistenceTimes, config.persistence_size())});
  return groups;
}

std::vector<FeatureGroup> observed_forecast_groups(const NowcastFeatureConfig& config, int forecast_rows) {
  if (forecast_rows < 1 || forecast_rows >= kObservedRows) {
    throw Error(ErrorCode::invalid_argument, "shapley: forecast_rows must be in 1..12");
  }
  const int split = kObservedRows - forecast_rows;
  std::vector<FeatureGroup> groups;
  for (int q = 0; q < kQuadrants; ++q) {
    groups.push_back({std::string(kImageChannelNames[q]) + "_observed", {q}, 0, split, {}});
    groups.push_back({std::string(kImageChannelNames[q]) + "_forecast", {q}, split, kObservedRows, {}});
  }
  for (int c = kQuadrants; c < kImageChannels; ++c) groups.push_back({kImageChannelNames[c], {c}, 0, kObservedRows, {}});
  groups.push_back({"Y", {}, 0, 0, iota_vector(0, kPersistenceTimes)});
  groups.push_back({"dY", {}, 0, 0, iota_vector(kPersistenceTimes, config.persistence_size())});
  return groups;
}

ShapleyBaseline training_mean_baseline(const NowcastModel& model, const NowcastFeatures& features) {
  if (model.persistence_mean.size() != features.persistence.size()) {
    throw Error(ErrorCode::shape, "shapley: model and features disagree on persistence size");
  }
  ShapleyBaseline b;
  for (int q = 0; q < kQuadrants; ++q) b.image[q] = model.image_mean[q];
  for (int c = kQuadrants; c < kImageChannels; ++c) b.image[c] = features.image.col(c).mean();
  b.persistence = model.persistence_mean;
  return b;
}

ShapleyBaseline sample_mean_baseline(const std::vector<NowcastSample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "shapley: no samples for the baseline");
  ShapleyBaseline b;
  b.persistence.assign(samples.front().features.persistence.size(), 0.0);
  for (const auto& s : samples) {
    for (int c = 0; c < kImageChannels; ++c) b.image[c] += s.features.image.col(c).mean();
    if (s.features.persistence.size() != b.persistence.size()) throw Error(ErrorCode::shape, "shapley: ragged persistence");
    for (std::size_t i = 0; i < b.persistence.size(); ++i) b.persistence[i] += s.features.persistence[i];
  }
  const double n = static_cast<double>(samples.size());
  for (double& v : b.image) v /= n;
  for (double& v : b.persistence) v /= n;
  return b;
}

NowcastFeatures masked_features(const NowcastFeatures& features, const std::vector<FeatureGroup>& groups,
                                std::uint64_t coalition, const ShapleyBaseline& baseline) {
  if (baseline.persistence.size() != features.persistence.size()) {
    throw Error(ErrorCode::shape, "shapley: baseline persistence size differs from the features");
  }
  NowcastFeatures out = features;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (coalition >> g & 1U) continue;
    const auto& group = groups[g];
    for (int c : group.image_channels) {
      out.image.block(static_cast<Eigen::Index>(group.row_begin) * kRadialBins, c,
                      static_cast<Eigen::Index>(group.row_end - group.row_begin) * kRadialBins, 1)
          .setConstant(baseline.image[c]);
    }
    for (int i : group.persistence) out.persistence[i] = baseline.persistence[i];
  }
  return out;
}

ShapleyResult channel_shapley(const NowcastModel& model, const NowcastFeatures& features,
                              const std::vector<FeatureGroup>& groups, const ShapleyBaseline& baseline,
                              const ShapleyOptions& options, Rng& rng) {
  if (!options.exhaustive && options.n_samples < 1) throw Error(ErrorCode::invalid_argument, "shapley: n_samples must be at least 1");
  check_groups(groups, features);
  const int n = static_cast<int>(groups.size());
  if (options.exhaustive && n > 16) throw Error(ErrorCode::invalid_argument, "shapley: exhaustive needs at most 16 groups");

  std::unordered_map<std::uint64_t, double> memo;
  const auto value = [&](std::uint64_t coalition) {
    const auto it = memo.find(coalition);
    if (it != memo.end()) return it->second;
    const double v = predict_now(model, masked_features(features, groups, coalition, baseline));
    memo.emplace(coalition, v);
    return v;
  };
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;

  ShapleyResult r;
  for (const auto& g : groups) r.names.push_back(g.name);
  r.attributions.assign(static_cast<std::size_t>(n), 0.0);
  r.value = value(all);
  r.baseline_value = value(0);
  r.exhaustive = options.exhaustive;

  if (options.exhaustive) {
    // phi_i = sum over S not containing i of |S|! (n - |S| - 1)! / n! * (v(S + i) - v(S))
    std::vector<double> weight(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) weight[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(n - s + 0.0) - std::lgamma(n + 1.0));
    for (std::uint64_t S = 0; S <= all; ++S) {
      const double vs = value(S);
      const int size = std::popcount(S);
      for (int i = 0; i < n; ++i) {
        if (S >> i & 1U) continue;
        r.attributions[i] += weight[size] * (value(S | std::uint64_t{1} << i) - vs);
      }
    }
    r.permutations = static_cast<int>(std::lround(std::tgamma(n + 1.0)));
  } else {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int p = 0; p < options.n_samples; ++p) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::uint64_t S = 0;
      double prev = r.baseline_value;
      for (int i : order) {
        S |= std::uint64_t{1} << i;
        const double v = value(S);
        r.attributions[i] += v - prev;
        prev = v;
      }
    }
    for (double& a : r.attributions) a /= options.n_samples;
    r.permutations = options.n_samples;
  }
  r.evaluations = static_cast<int>(memo.size());
  r.efficiency_residual =
      std::accumulate(r.attributions.begin(), r.attributions.end(), 0.0) - (r.value - r.baseline_value);
  return r;
}

void write_shapley_table(std::ostream& out, const ShapleyResult& result) {
  char buf[128];
  out << "group,attribution\n";
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.9g\n", result.names[i].c_str(), result.attributions[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "# value=%.9g baseline=%.9g residual=%.3g permutations=%d%s\n", result.value,
                result.baseline_value, result.efficiency_residual, result.permutations,
                result.exhaustive ? " exhaustive" : "");
  out << buf;
}

}  // namespace tcsf
