#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "tcsf/common.hpp"
#include "tcsf/rng.hpp"
#include "tcsf/synth.hpp"

namespace tcsf {

namespace fs = std::filesystem;

StormSplits split_storms(std::vector<std::string> ids, std::uint64_t seed) {
  const int n = static_cast<int>(ids.size());
  if (n < 3) throw Error(ErrorCode::invalid_argument, "splits need at least 3 storms, got " + std::to_string(n));
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::invalid_argument, "splits: duplicate storm id");
  }
  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const int held = std::max(1, static_cast<int>(std::lround(0.2 * n)));
  StormSplits s;
  s.validation.assign(ids.begin(), ids.begin() + held);
  s.test.assign(ids.begin() + held, ids.begin() + 2 * held);
  s.train.assign(ids.begin() + 2 * held, ids.end());
  for (auto* v : {&s.train, &s.validation, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

SynthCorpus gen_corpus(int n_storms, std::uint64_t seed, const SynthCorpusOptions& options) {
  if (n_storms < 3) throw Error(ErrorCode::invalid_argument, "corpus needs at least 3 storms");
  if (n_storms > 99 * 20) throw Error(ErrorCode::invalid_argument, "corpus too large for the id scheme");
  Rng rng(seed);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform_open(rng); };
  SynthCorpus c;
  std::vector<std::string> ids;
  for (int i = 0; i < n_storms; ++i) {
    SynthStormSpec s;
    const int year = 2001 + i / 20;
    char id[16];
    std::snprintf(id, sizeof id, "AL%02d%04d", i % 20 + 1, year);
    s.storm_id = id;
    s.name = "SYN" + std::to_string(i);
    s.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(i));
    s.genesis = make_time(year, 7, 1, 0) + Hours{24 * 5 * (i % 20)};
    s.duration_h = 6.0 * std::round(uniform(options.min_duration_h, options.max_duration_h) / 6.0);
    s.initial_kt = uniform(20.0, 35.0);
    s.peak_kt = uniform(55.0, 140.0);
    s.growth_rate_per_h = uniform(0.05, 0.12);
    s.peak_time_h = uniform(0.3, 0.6) * s.duration_h;
    s.decay_rate_per_h = uniform(0.01, 0.03);
    s.shear_kt = uniform(0.0, 25.0);
    s.shear_heading_deg = std::round(uniform(0.0, 359.0));
    s.lat0 = uniform(10.0, 20.0);
    s.lon0 = uniform(-60.0, -30.0);
    s.pixel_km = options.pixel_km;
    s.extent = options.extent;
    s.structure_noise_degc = options.structure_noise_degc;
    ids.push_back(s.storm_id);
    c.specs.push_back(std::move(s));
  }
  c.splits = split_storms(ids, derive_seed(seed, 1));
  return c;
}

void write_splits_json(const StormSplits& splits, const fs::path& path) {
  nlohmann::json j;
  j["train"] = splits.train;
  j["validation"] = splits.validation;
  j["test"] = splits.test;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

StormSplits read_splits_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    StormSplits s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

void write_synth_corpus(const SynthCorpus& corpus, const fs::path& root) {
  fs::create_directories(root / "adeck");
  std::vector<StormTrack> tracks;
  std::vector<ShipsCase> ships;
  ShipsConfig ships_config;
  for (const auto& spec : corpus.specs) {
    const fs::path stamp_dir = root / "storms" / spec.storm_id / "stamps";
    fs::create_directories(stamp_dir);
    const SynthStorm storm =
        gen_storm(spec, [&](BrightnessStamp&& st) { store_stamp(st, stamp_dir / format_compact(st.time)); });
    StormTrack track;
    track.header = {spec.storm_id, spec.name, static_cast<int>(storm.best_track.size()), 0};
    track.points = storm.best_track;
    tracks.push_back(std::move(track));
    std::ofstream adeck(root / "adeck" / (spec.storm_id + ".dat"));
    if (!adeck) throw Error(ErrorCode::io, "cannot write a-deck for " + spec.storm_id);
    write_adeck_carq(adeck, storm.operational);
    for (std::size_t i = 0; i < storm.shear.size(); ++i) {
      const auto& bt = storm.best_track[i];
      ShipsCase sc;
      sc.storm_id = spec.storm_id;
      sc.time = storm.shear[i].time;
      sc.vmax = *bt.vmax;
      sc.lat = bt.lat;
      sc.lon = bt.lon;
      sc.magnitude_raw = storm.shear[i].magnitude / ships_config.magnitude_scale;
      sc.direction_raw = storm.shear[i].direction;
      ships.push_back(sc);
    }
  }
  std::ofstream hurdat(root / "hurdat2.txt");
  if (!hurdat) throw Error(ErrorCode::io, "cannot write hurdat2.txt");
  write_hurdat2(hurdat, tracks);
  std::ofstream ships_out(root / "ships.txt");
  if (!ships_out) throw Error(ErrorCode::io, "cannot write ships.txt");
  write_ships(ships_out, ships, ships_config);
  write_splits_json(corpus.splits, root / "splits.json");
}

}  // namespace tcsf
