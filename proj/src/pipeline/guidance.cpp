#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "tcsf/common.hpp"
#include "tcsf/pipeline.hpp"

namespace tcsf {

namespace fs = std::filesystem;

GuidanceRecord make_guidance_record(const ForecastEnsemble& ensemble, std::optional<double> observed) {
  return {ensemble.storm_id, ensemble.anchor,  ensemble.lead_h, ensemble.member_intensities,
          ensemble.mean_intensity, ensemble.spread(), observed};
}

std::string format_guidance_record(const GuidanceRecord& r) {
  nlohmann::ordered_json j;
  j["storm_id"] = r.storm_id;
  j["anchor"] = format_iso(r.anchor);
  j["lead_h"] = r.lead_h;
  j["n"] = r.members.size();
  j["members"] = r.members;
  j["mean"] = r.mean;
  j["spread"] = r.spread;
  j["observed"] = r.observed ? nlohmann::ordered_json(*r.observed) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

GuidanceRecord parse_guidance_record(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    GuidanceRecord r;
    r.storm_id = j.at("storm_id").get<std::string>();
    r.anchor = parse_time(j.at("anchor").get<std::string>());
    r.lead_h = j.at("lead_h").get<int>();
    r.members = j.at("members").get<std::vector<double>>();
    r.mean = j.at("mean").get<double>();
    r.spread = j.at("spread").get<double>();
    if (!j.at("observed").is_null()) r.observed = j.at("observed").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("guidance record: ") + e.what());
  }
}

void write_guidance_records(const std::vector<GuidanceRecord>& records, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  for (const auto& r : records) out << format_guidance_record(r) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

std::vector<GuidanceRecord> read_guidance_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::vector<GuidanceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_guidance_record(line));
  }
  return out;
}

std::vector<SpaghettiPanel> spaghetti_panels(const ForecastEnsemble& ensemble) {
  std::vector<SpaghettiPanel> panels(kQuadrants);
  const int row = kObservedRows - 1 + ensemble.lead_h / 2;
  for (int q = 0; q < kQuadrants; ++q) {
    SpaghettiPanel& p = panels[q];
    p.quadrant = static_cast<Quadrant>(q);
    p.mean.assign(kRadialBins, 0.0);
    for (const auto& traj : ensemble.trajectories) {
      std::vector<double> line(kRadialBins);
      for (int k = 0; k < kRadialBins; ++k) {
        line[k] = traj.at(row, k, q);
        p.mean[k] += line[k];
      }
      p.members.push_back(std::move(line));
    }
    if (!p.members.empty()) {
      for (double& v : p.mean) v /= static_cast<double>(p.members.size());
    }
  }
  return panels;
}

namespace {

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kRed{220, 30, 30};
constexpr Rgb kGrey{150, 150, 150};
constexpr Rgb kAxis{60, 60, 60};

void frame(Image& img, int x0, int y0, int x1, int y1) {
  img.line(x0, y0, x1, y0, kAxis);
  img.line(x0, y1, x1, y1, kAxis);
  img.line(x0, y0, x0, y1, kAxis);
  img.line(x1, y0, x1, y1, kAxis);
}

}  // namespace

Image render_histogram(const ForecastEnsemble& ensemble, std::optional<double> observed) {
  const int width = 480, height = 300, margin = 30;
  Image img(width, height);
  const auto& m = ensemble.member_intensities;
  if (m.empty()) return img;
  double lo = *std::min_element(m.begin(), m.end());
  double hi = *std::max_element(m.begin(), m.end());
  if (observed) {
    lo = std::min(lo, *observed);
    hi = std::max(hi, *observed);
  }
  const double bin = 5.0;
  lo = bin * std::floor(lo / bin) - bin;
  hi = bin * std::ceil(hi / bin) + bin;
  const int nbins = std::max(1, static_cast<int>(std::lround((hi - lo) / bin)));
  std::vector<int> counts(static_cast<std::size_t>(nbins), 0);
  for (double v : m) counts[std::clamp(static_cast<int>((v - lo) / bin), 0, nbins - 1)]++;
  const int top = *std::max_element(counts.begin(), counts.end());
  const double px_per_kt = (width - 2.0 * margin) / (hi - lo);
  const auto xpos = [&](double kt) { return margin + (kt - lo) * px_per_kt; };
  for (int b = 0; b < nbins; ++b) {
    const int bar = static_cast<int>(std::lround((height - 2.0 * margin) * counts[b] / top));
    img.fill_rect(static_cast<int>(xpos(lo + b * bin)) + 1, height - margin - bar,
                  static_cast<int>(xpos(lo + (b + 1) * bin)) - 1, height - margin, {120, 150, 200});
  }
  frame(img, margin, margin, width - margin, height - margin);
  const double mx = xpos(ensemble.mean_intensity);
  img.line(mx, margin, mx, height - margin, kRed);
  img.line(mx + 1, margin, mx + 1, height - margin, kRed);
  if (observed) {
    const double ox = xpos(*observed);
    img.line(ox, margin, ox, height - margin, kBlack);
    img.line(ox + 1, margin, ox + 1, height - margin, kBlack);
  }
  return img;
}

Image render_spaghetti(const std::vector<SpaghettiPanel>& panels) {
  const int pw = 320, ph = 220, margin = 20;
  Image img(2 * pw, 2 * ph);
  // Panels laid out as on a map: NW NE / SW SE.
  const int col[kQuadrants] = {1, 0, 0, 1};
  const int row[kQuadrants] = {0, 0, 1, 1};
  for (const auto& p : panels) {
    const int q = static_cast<int>(p.quadrant);
    const int x0 = col[q] * pw + margin, y0 = row[q] * ph + margin;
    const int x1 = (col[q] + 1) * pw - margin, y1 = (row[q] + 1) * ph - margin;
    const auto xpos = [&](int k) { return x0 + (x1 - x0) * k / double(kRadialBins - 1); };
    const auto ypos = [&](double t) {
      const double f = (std::clamp(t, kColorScaleMin, kColorScaleMax) - kColorScaleMin) / (kColorScaleMax - kColorScaleMin);
      return y1 - f * (y1 - y0);
    };
    frame(img, x0, y0, x1, y1);
    for (const auto& line : p.members) {
      for (int k = 1; k < kRadialBins; ++k) img.line(xpos(k - 1), ypos(line[k - 1]), xpos(k), ypos(line[k]), kGrey);
    }
    for (int k = 1; k < static_cast<int>(p.mean.size()); ++k) {
      img.line(xpos(k - 1), ypos(p.mean[k - 1]), xpos(k), ypos(p.mean[k]), kRed);
    }
  }
  return img;
}

GuidanceFiles emit_guidance(const ForecastEnsemble& ensemble, const fs::path& dir, const std::string& stem,
                            int hovmoller_members, std::optional<double> observed) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  GuidanceFiles files;
  files.histogram = dir / (stem + "_histogram.png");
  write_png(render_histogram(ensemble, observed), files.histogram);
  files.spaghetti = dir / (stem + "_spaghetti.png");
  write_png(render_spaghetti(spaghetti_panels(ensemble)), files.spaghetti);
  const int n = std::min<int>(hovmoller_members, static_cast<int>(ensemble.trajectories.size()));
  for (int i = 0; i < n; ++i) {
    files.hovmollers.push_back(dir / (stem + "_member" + std::to_string(i) + ".png"));
    render_hovmoller(ensemble.trajectories[i], files.hovmollers.back());
  }
  files.record = dir / (stem + ".jsonl");
  write_guidance_records({make_guidance_record(ensemble, observed)}, files.record);
  return files;
}

}  // namespace tcsf
