#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tcsf/app.hpp"
#include "tcsf/common.hpp"
#include "tcsf/explain.hpp"
#include "tcsf/ingest.hpp"
#include "tcsf/verify.hpp"

namespace tcsf {

namespace fs = std::filesystem;

namespace {

struct Context {
  const RunConfig& config;
  const CommandArgs& args;
  Manifest manifest;
  std::ostringstream summary;

  fs::path out(const fs::path& rel) {
    const fs::path p = config.output_dir / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    manifest.outputs.push_back(p);
    return p;
  }
  fs::path in(const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorCode::io, "missing input " + p.string());
    manifest.inputs.push_back(p);
    return p;
  }
  std::uint64_t seed() const { return args.seed.value_or(config.seed); }
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::io, "cannot write " + p.string());
  return f;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorCode::io, "cannot read " + p.string());
  return f;
}

template <class T>
std::map<std::string, std::vector<T>> by_storm(const std::vector<T>& items) {
  std::map<std::string, std::vector<T>> m;
  for (const auto& it : items) m[it.storm_id].push_back(it);
  return m;
}

const fs::path kBestTrack = "ingest/best_track.csv";
const fs::path kOperational = "ingest/operational.csv";
const fs::path kShear = "ingest/shear.csv";
const fs::path kProfiles = "orb/profiles";

// ---- ingest -----------------------------------------------------------------

void cmd_ingest(Context& c) {
  const fs::path data = c.config.data_dir;
  auto hin = open_in(c.in(data / "hurdat2.txt"));
  const Hurdat2Result hurdat = parse_hurdat2(hin);
  std::vector<ParseIssue> issues = hurdat.warnings;

  std::vector<TrackPoint> best;
  for (const auto& storm : hurdat.storms) {
    const auto kept = lifetime_filter(storm.points);
    if (kept.empty()) continue;
    const auto interp = interpolate_track(kept);
    best.insert(best.end(), interp.begin(), interp.end());
  }

  std::vector<TrackPoint> ops;
  if (fs::is_directory(data / "adeck")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(data / "adeck")) {
      if (e.path().extension() == ".dat") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto in = open_in(c.in(f));
      const AdeckResult a = parse_adeck_carq(in);
      ops.insert(ops.end(), a.points.begin(), a.points.end());
      issues.insert(issues.end(), a.errors.begin(), a.errors.end());
    }
  }

  std::vector<ShearRecord> shear;
  if (fs::exists(data / "ships.txt")) {
    auto in = open_in(c.in(data / "ships.txt"));
    const ShipsResult s = parse_ships_shear(in);
    shear = s.records;
    issues.insert(issues.end(), s.warnings.begin(), s.warnings.end());
    issues.insert(issues.end(), s.errors.begin(), s.errors.end());
  }

  auto bt = open_out(c.out(kBestTrack));
  write_track_csv(bt, best);
  auto op = open_out(c.out(kOperational));
  write_track_csv(op, ops);
  auto sh = open_out(c.out(kShear));
  write_shear_csv(sh, shear);
  auto is = open_out(c.out("ingest/issues.txt"));
  for (const auto& i : issues) is << "line " << i.line << " field " << i.field << ": " << i.message << '\n';
  c.summary << hurdat.storms.size() << " storms, " << best.size() << " best-track points (2 h), " << ops.size()
            << " CARQ points, " << shear.size() << " shear records, " << issues.size() << " issues";
}

std::vector<TrackPoint> read_tracks(Context& c, const fs::path& rel) {
  const fs::path p = c.config.output_dir / rel;
  if (!fs::exists(p)) throw Error(ErrorCode::state, "missing " + p.string() + "; run ingest first");
  auto in = open_in(c.in(p));
  return read_track_csv(in);
}

// ---- extract-orb -------------------------------------------------------------

void cmd_extract_orb(Context& c) {
  const auto best = by_storm(read_tracks(c, kBestTrack));
  std::vector<StormProfiles> storms;
  std::size_t n = 0;
  for (const auto& [id, points] : best) {
    const fs::path dir = c.config.data_dir / "storms" / id / "stamps";
    if (!fs::is_directory(dir)) continue;
    c.manifest.inputs.push_back(dir);
    std::vector<fs::path> headers;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".hdr") headers.push_back(e.path());
    }
    std::sort(headers.begin(), headers.end());
    StormProfiles sp{id, {}};
    for (const auto& h : headers) {
      const RadialProfileSet set = compute_radial_profiles(load_stamp(fs::path(h).replace_extension()));
      sp.series.emplace(set.time, set);
    }
    n += sp.series.size();
    storms.push_back(std::move(sp));
  }
  if (storms.empty()) throw Error(ErrorCode::io, "no stamp directories under " + (c.config.data_dir / "storms").string());
  const fs::path base = c.config.output_dir / kProfiles;
  fs::create_directories(base.parent_path());
  store_profile_archive(storms, base);
  c.manifest.outputs.push_back(fs::path(base).concat(".hdr"));
  c.manifest.outputs.push_back(fs::path(base).concat(".bin"));
  c.summary << storms.size() << " storms, " << n << " profile sets";
}

std::map<std::string, ProfileSeries> read_profiles(Context& c) {
  const fs::path base = c.config.output_dir / kProfiles;
  if (!fs::exists(fs::path(base).concat(".hdr"))) {
    throw Error(ErrorCode::state, "missing profile archive " + base.string() + "; run extract-orb first");
  }
  c.manifest.inputs.push_back(fs::path(base).concat(".hdr"));
  c.manifest.inputs.push_back(fs::path(base).concat(".bin"));
  std::map<std::string, ProfileSeries> out;
  for (auto& s : load_profile_archive(base)) out[s.storm_id] = std::move(s.series);
  return out;
}

StormSplits read_splits(Context& c) { return read_splits_json(c.in(c.config.splits())); }

const std::vector<std::string>& split_ids(const StormSplits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") return s.test;
  throw Error(ErrorCode::invalid_argument, "unknown split '" + name + "' (train, validation or test)");
}

// ---- training ------------------------------------------------------------------

void cmd_train_sim(Context& c) {
  const auto profiles = read_profiles(c);
  const StormSplits splits = read_splits(c);
  const auto windows = [&](const std::vector<std::string>& ids, int stride) {
    std::vector<StructuralTrajectory> out;
    for (const auto& id : ids) {
      const auto it = profiles.find(id);
      if (it == profiles.end()) continue;
      const auto w = sliding_windows(it->second, c.config.sim_arch.window_rows, stride);
      out.insert(out.end(), w.begin(), w.end());
    }
    return out;
  };
  const auto train = windows(splits.train, c.config.sim_train_stride);
  const auto held = windows(splits.validation, c.config.sim_heldout_stride);
  const StructSimModel model = train_structsim(train, held, c.config.sim_arch, c.config.sim_train, c.seed());
  save_structsim(model, c.config.checkpoints() / "structsim.ckpt");
  c.manifest.outputs.push_back(c.config.checkpoints() / "structsim.ckpt");
  auto log = open_out(c.out("train/structsim_log.csv"));
  log << "epoch,train_nll,heldout_nll\n";
  for (const auto& e : model.log) log << e.epoch << ',' << e.train_nll << ',' << e.heldout_nll << '\n';
  c.summary << train.size() << " training windows, " << held.size() << " held-out windows, final held-out NLL "
            << model.log.back().heldout_nll;
}

void cmd_train_nowcast(Context& c) {
  const auto profiles = read_profiles(c);
  const auto best = by_storm(read_tracks(c, kBestTrack));
  const StormSplits splits = read_splits(c);
  const auto samples = [&](const std::vector<std::string>& ids) {
    std::vector<NowcastSample> out;
    for (const auto& id : ids) {
      const auto p = profiles.find(id);
      const auto b = best.find(id);
      if (p == profiles.end() || b == best.end()) continue;
      auto s = build_nowcast_samples(id, p->second, b->second, c.config.features);
      std::move(s.begin(), s.end(), std::back_inserter(out));
    }
    return out;
  };
  const auto train = samples(splits.train);
  const auto held = samples(splits.validation);
  const NowcastModel model =
      train_nowcast(train, held, c.config.now_arch, c.config.now_train, c.config.features, c.seed());
  save_nowcast(model, c.config.checkpoints() / "nowcast.ckpt");
  c.manifest.outputs.push_back(c.config.checkpoints() / "nowcast.ckpt");
  auto log = open_out(c.out("train/nowcast_log.csv"));
  log << "epoch,train_mse,heldout_mse\n";
  for (const auto& e : model.log) log << e.epoch << ',' << e.train_mse << ',' << e.heldout_mse << '\n';
  c.summary << train.size() << " training samples, " << held.size() << " held-out samples, final held-out MSE "
            << model.log.back().heldout_mse;
}

// ---- forecasting ----------------------------------------------------------------

StructSimModel read_sim(Context& c) {
  const fs::path p = c.config.checkpoints() / "structsim.ckpt";
  if (!fs::exists(p)) throw Error(ErrorCode::state, "missing " + p.string() + "; run train-sim first");
  return load_structsim(c.in(p));
}

NowcastModel read_now(Context& c) {
  const fs::path p = c.config.checkpoints() / "nowcast.ckpt";
  if (!fs::exists(p)) throw Error(ErrorCode::state, "missing " + p.string() + "; run train-nowcast first");
  return load_nowcast(c.in(p));
}

std::vector<StormCase> read_cases(Context& c, const std::vector<std::string>& ids) {
  auto profiles = read_profiles(c);
  const auto best = by_storm(read_tracks(c, kBestTrack));
  const auto ops = by_storm(read_tracks(c, kOperational));
  std::vector<ShearRecord> shear;
  if (fs::exists(c.config.output_dir / kShear)) {
    auto in = open_in(c.in(c.config.output_dir / kShear));
    shear = read_shear_csv(in);
  }
  const auto shear_by = by_storm(shear);
  std::vector<StormCase> out;
  for (const auto& id : ids) {
    StormCase s;
    s.storm_id = id;
    if (profiles.count(id)) s.profiles = std::move(profiles[id]);
    if (best.count(id)) s.best_track = best.at(id);
    if (ops.count(id)) s.operational = ops.at(id);
    if (shear_by.count(id)) s.shear = shear_by.at(id);
    out.push_back(std::move(s));
  }
  return out;
}

std::string case_stem(const std::string& storm, UtcTime t) { return storm + "_" + format_compact(t); }

int lead_of(const Context& c) {
  const int lead = c.args.lead.value_or(6);
  if (lead != 6 && lead != 12) throw Error(ErrorCode::invalid_argument, "--lead must be 6 or 12");
  return lead;
}

void write_records(Context& c, const fs::path& rel, const std::vector<VerificationRecord>& records) {
  auto f = open_out(c.out(rel));
  write_records_csv(f, records);
}

void cmd_forecast(Context& c) {
  const int lead = lead_of(c);
  const int members = c.args.members.value_or(c.config.members);
  const StructSimModel sim = read_sim(c);
  const NowcastModel now = read_now(c);
  if (c.args.storm || c.args.time) {
    if (!c.args.storm || !c.args.time) throw Error(ErrorCode::invalid_argument, "--storm and --time go together");
    const StormCase storm = read_cases(c, {*c.args.storm}).front();
    if (storm.profiles.empty()) throw Error(ErrorCode::invalid_argument, "no profiles for storm " + storm.storm_id);
    ForecastEnsemble ens = forecast(sim, now, storm.profiles, storm.operational, *c.args.time, lead, members,
                                    c.seed(), c.config.chain);
    ens.storm_id = storm.storm_id;
    const auto observed = vmax_at(storm.best_track, *c.args.time + Hours{lead});
    const std::string stem = case_stem(storm.storm_id, *c.args.time) + "_" + std::to_string(lead) + "h";
    const GuidanceFiles files =
        emit_guidance(ens, c.config.output_dir / "forecast", stem, c.config.hovmoller_members, observed);
    c.manifest.outputs.push_back(files.histogram);
    c.manifest.outputs.push_back(files.spaghetti);
    for (const auto& h : files.hovmollers) c.manifest.outputs.push_back(h);
    c.manifest.outputs.push_back(files.record);
    c.summary << storm.storm_id << ' ' << format_iso(*c.args.time) << " +" << lead << "h: mean "
              << ens.mean_intensity << " kt, spread " << ens.spread() << " kt, " << members << " members";
    return;
  }
  const StormSplits splits = read_splits(c);
  const auto cases = read_cases(c, split_ids(splits, c.args.split));
  const BulkVerification bulk = run_bulk_verification(sim, now, cases, lead, members, c.seed(), c.config.chain);
  if (bulk.model.empty()) throw Error(ErrorCode::domain, "no forecastable anchors in the " + c.args.split + " split");
  const std::string tag = std::to_string(lead) + "h";
  write_guidance_records(bulk.guidance, c.out("forecast/guidance_" + tag + ".jsonl"));
  write_records(c, "forecast/records_" + tag + ".csv", bulk.model);
  write_records(c, "forecast/persistence_" + tag + ".csv", bulk.persistence);
  write_records(c, "forecast/frozen_" + tag + ".csv", bulk.frozen);
  auto st = open_out(c.out("forecast/structure_" + tag + (c.config.csv_tables ? ".csv" : ".txt")));
  if (!c.config.csv_tables) st << "# ensemble\n";
  write_trajectory_table(st, combine_scores(bulk.structure), c.config.csv_tables);
  if (!c.config.csv_tables) st << "# frozen-profile baseline\n";
  write_trajectory_table(st, combine_scores(bulk.structure_persistence), c.config.csv_tables);

  std::vector<double> p, pp, pf, t;
  for (std::size_t i = 0; i < bulk.model.size(); ++i) {
    p.push_back(bulk.model[i].prediction);
    pp.push_back(bulk.persistence[i].prediction);
    pf.push_back(bulk.frozen[i].prediction);
    t.push_back(bulk.model[i].truth);
  }
  c.summary << bulk.model.size() << " anchors at +" << tag << ": MAE " << intensity_score(p, t).mae
            << " kt (persistence " << intensity_score(pp, t).mae << ", frozen profiles " << intensity_score(pf, t).mae
            << ")";
}

// ---- verify ------------------------------------------------------------------------

void cmd_verify(Context& c) {
  std::vector<fs::path> inputs;
  if (c.args.records) {
    inputs.push_back(*c.args.records);
  } else {
    for (const char* lead : {"6h", "12h"}) {
      const fs::path p = c.config.output_dir / "forecast" / (std::string("records_") + lead + ".csv");
      if (fs::exists(p)) inputs.push_back(p);
    }
    if (inputs.empty()) throw Error(ErrorCode::state, "no forecast records found; run forecast or pass --records");
  }
  for (const auto& path : inputs) {
    auto in = open_in(c.in(path));
    const auto records = read_records_csv(in);
    const BinnedVerification v = binned_verification(records);
    const std::string ext = c.config.csv_tables ? ".csv" : ".txt";
    auto f = open_out(c.out(fs::path("verify") / (path.stem().string() + "_tables" + ext)));
    if (c.config.csv_tables) {
      f << "table,bin,rmse,mae,bias,n\n";
      f << "overall,all," << v.overall.rmse << ',' << v.overall.mae << ',' << v.overall.bias << ',' << v.overall.n << '\n';
      for (const BinnedTable* t : {&v.shear_magnitude, &v.shear_direction, &v.category, &v.evolution}) {
        std::ostringstream ss;
        write_table_csv(ss, *t);
        const std::string body = ss.str();
        f << body.substr(body.find('\n') + 1);
      }
    } else {
      BinnedTable overall{"overall", {"all"}, {v.overall}, 0};
      write_table_text(f, overall);
      for (const BinnedTable* t : {&v.shear_magnitude, &v.shear_direction, &v.category, &v.evolution}) {
        f << '\n';
        write_table_text(f, *t);
      }
    }
    c.summary << path.filename().string() << ": n=" << v.overall.n << " RMSE " << v.overall.rmse << " MAE "
              << v.overall.mae << " bias " << v.overall.bias << "; ";
  }
}

// ---- explain / render -------------------------------------------------------------

std::pair<StormCase, UtcTime> single_case(Context& c) {
  if (!c.args.storm || !c.args.time) throw Error(ErrorCode::invalid_argument, "--storm and --time are required");
  StormCase s = read_cases(c, {*c.args.storm}).front();
  if (s.profiles.empty()) throw Error(ErrorCode::invalid_argument, "no profiles for storm " + s.storm_id);
  return {std::move(s), *c.args.time};
}

void cmd_explain(Context& c) {
  const NowcastModel now = read_now(c);
  const auto [storm, t] = single_case(c);
  const NowcastFeatures f =
      build_features(assemble_trajectory(storm.profiles, t), truncate_series(storm.operational, t), t, now.features);
  const std::string stem = case_stem(storm.storm_id, t);
  const SaliencyMap map = gradient_saliency(now, f);
  auto sal = open_out(c.out("explain/" + stem + "_saliency.csv"));
  write_saliency_table(sal, map, now.features);
  render_saliency(map, c.out("explain/" + stem + "_saliency.png"));
  Rng rng(derive_seed(c.seed(), 0));
  const ShapleyResult r = channel_shapley(now, f, default_feature_groups(now.features), training_mean_baseline(now, f),
                                          {64, true}, rng);
  auto sh = open_out(c.out("explain/" + stem + "_shapley.csv"));
  write_shapley_table(sh, r);
  c.summary << "nowcast " << r.value << " kt, baseline " << r.baseline_value << " kt, efficiency residual "
            << r.efficiency_residual;
}

void cmd_render(Context& c) {
  const auto [storm, t] = single_case(c);
  const fs::path p = c.out("render/" + case_stem(storm.storm_id, t) + "_hovmoller.png");
  render_hovmoller(assemble_trajectory(storm.profiles, t), p);
  c.summary << p.string();
}

// ---- synth ---------------------------------------------------------------------------

void cmd_synth(Context& c) {
  SynthCorpus corpus = gen_corpus(c.config.synth_storms, c.seed(), c.config.synth);
  write_synth_corpus(corpus, c.config.data_dir);
  for (const char* f : {"hurdat2.txt", "ships.txt", "splits.json", "adeck", "storms"}) {
    c.manifest.outputs.push_back(c.config.data_dir / f);
  }
  c.summary << corpus.specs.size() << " storms written to " << c.config.data_dir.string() << " (train "
            << corpus.splits.train.size() << ", validation " << corpus.splits.validation.size() << ", test "
            << corpus.splits.test.size() << ")";
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"ingest", cmd_ingest},       {"synth", cmd_synth},
      {"extract-orb", cmd_extract_orb}, {"train-sim", cmd_train_sim},
      {"train-nowcast", cmd_train_nowcast}, {"forecast", cmd_forecast},
      {"verify", cmd_verify},       {"explain", cmd_explain},
      {"render", cmd_render},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"ingest",  "synth",  "extract-orb", "train-sim", "train-nowcast",
                                              "forecast", "verify", "explain",     "render"};
  return names;
}

CommandResult run_command(const std::string& command, const RunConfig& config, const CommandArgs& args) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  config.validate();
  if (args.members && *args.members < 1) throw Error(ErrorCode::invalid_argument, "--members must be at least 1");
  if (args.lead && *args.lead != 6 && *args.lead != 12) throw Error(ErrorCode::invalid_argument, "--lead must be 6 or 12");
  OutputLock lock(config.output_dir);
  Context c{config, args, {}, {}};
  c.manifest.command = command;
  c.manifest.config_hash = config_hash(config);
  c.manifest.seed = c.seed();
  if (args.storm) c.manifest.arguments.push_back("storm=" + *args.storm);
  if (args.time) c.manifest.arguments.push_back("time=" + format_iso(*args.time));
  if (args.lead) c.manifest.arguments.push_back("lead=" + std::to_string(*args.lead));
  if (args.members) c.manifest.arguments.push_back("members=" + std::to_string(*args.members));
  if (args.records) c.manifest.arguments.push_back("records=" + args.records->string());
  c.manifest.arguments.push_back("split=" + args.split);
  it->second(c);
  auto cfg = open_out(c.out(fs::path("manifests") / (command + ".config.json")));
  cfg << format_config(config) << '\n';
  cfg.close();
  CommandResult r;
  r.outputs = c.manifest.outputs;
  r.outputs.push_back(write_manifest(c.manifest, config.output_dir));
  r.summary = c.summary.str();
  return r;
}

}  // namespace tcsf
