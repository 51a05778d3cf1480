#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tcsf/common.hpp"
#include "tcsf/explain.hpp"

namespace tcsf {

SaliencyMap gradient_saliency(const NowcastModel& model, const NowcastFeatures& features) {
  if (features.image.rows() != kObservedRows * kRadialBins || features.image.cols() != kImageChannels) {
    throw Error(ErrorCode::shape, "saliency: image must be 1040 x 6");
  }
  if (static_cast<int>(features.persistence.size()) != model.features.persistence_size()) {
    throw Error(ErrorCode::shape, "saliency: expected " + std::to_string(model.features.persistence_size()) +
                                      " persistence entries, got " + std::to_string(features.persistence.size()));
  }
  const NowcastGradient g = predict_with_gradient(model, features);
  SaliencyMap s;
  s.time = features.time;
  s.image = g.image.cwiseAbs();
  for (int c = 0; c < kImageChannels; ++c) s.channel_sums[c] = s.image.col(c).sum();
  for (double v : g.persistence) {
    s.persistence.push_back(std::abs(v));
    s.persistence_sum += std::abs(v);
  }
  return s;
}

std::vector<std::vector<double>> detrend_channel_saliency(const std::vector<std::vector<double>>& series) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::invalid_argument, "detrend: need at least 3 times, got " + std::to_string(n));
  const std::size_t channels = series.front().size();
  for (const auto& row : series) {
    if (row.size() != channels) throw Error(ErrorCode::shape, "detrend: ragged channel series");
  }
  // Centred time index makes the intercept and slope fits independent.
  const double t_mean = (static_cast<double>(n) - 1.0) / 2.0;
  double stt = 0.0;
  for (std::size_t t = 0; t < n; ++t) stt += (t - t_mean) * (t - t_mean);
  std::vector<std::vector<double>> out(n, std::vector<double>(channels));
  for (std::size_t c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += series[t][c];
    mean /= static_cast<double>(n);
    double sty = 0.0;
    for (std::size_t t = 0; t < n; ++t) sty += (t - t_mean) * (series[t][c] - mean);
    const double slope = sty / stt;
    for (std::size_t t = 0; t < n; ++t) out[t][c] = series[t][c] - mean - slope * (t - t_mean);
  }
  return out;
}

std::vector<std::vector<double>> channel_saliency_series(const std::vector<SaliencyMap>& maps) {
  std::vector<std::vector<double>> out;
  for (const auto& m : maps) {
    std::vector<double> row(m.channel_sums.begin(), m.channel_sums.end());
    row.push_back(m.persistence_sum);
    out.push_back(std::move(row));
  }
  return out;
}

void write_saliency_table(std::ostream& out, const SaliencyMap& map, const NowcastFeatureConfig& config) {
  out << "time,channel,saliency\n";
  const std::string when = format_iso(map.time);
  char buf[64];
  const auto value = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (int c = 0; c < kImageChannels; ++c) out << when << ',' << kImageChannelNames[c] << ',' << value(map.channel_sums[c]) << '\n';
  const int step = config.thirteen_deltas ? 2 : 6;
  for (std::size_t i = 0; i < map.persistence.size(); ++i) {
    std::string name;
    if (i < static_cast<std::size_t>(kPersistenceTimes)) {
      name = "Y(t" + std::to_string(-30 + 6 * static_cast<int>(i)) + "h)";
    } else {
      name = "dY(t" + std::to_string(-30 + step * static_cast<int>(i - kPersistenceTimes)) + "h)";
    }
    out << when << ',' << name << ',' << value(map.persistence[i]) << '\n';
  }
}

void render_saliency(const SaliencyMap& map, const std::filesystem::path& path, int scale) {
  if (scale < 1) throw Error(ErrorCode::invalid_argument, "render: scale must be positive");
  const int gap = 2;
  const int panel_w = kRadialBins * scale;
  const int panel_h = kObservedRows * scale;
  Image img(kQuadrants * panel_w + (kQuadrants - 1) * gap, panel_h);
  double peak = 0.0;
  for (int q = 0; q < kQuadrants; ++q) peak = std::max(peak, map.image.col(q).maxCoeff());
  for (int q = 0; q < kQuadrants; ++q) {
    const int x0 = q * (panel_w + gap);
    for (int r = 0; r < kObservedRows; ++r) {
      for (int k = 0; k < kRadialBins; ++k) {
        const double v = peak > 0.0 ? map.image(r * kRadialBins + k, q) / peak : 0.0;
        const auto level = static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
        img.fill_rect(x0 + k * scale, r * scale, x0 + (k + 1) * scale - 1, (r + 1) * scale - 1, {255, level, level});
      }
    }
  }
  write_png(img, path);
}

}  // namespace tcsf
