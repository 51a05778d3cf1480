#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tcsf/app.hpp"
#include "tcsf/common.hpp"

namespace tcsf {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw Error(ErrorCode::config, "config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw Error(ErrorCode::config, "config: unknown key " + where + "." + key);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, "config: " + where + "." + key + " has the wrong type");
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& out, const std::string& where) {
  std::string s = out.string();
  read(obj, key, s, where);
  out = s;
}

json to_json(const RunConfig& c) {
  return json{
      {"paths",
       {{"data", c.data_dir.string()},
        {"output", c.output_dir.string()},
        {"checkpoints", c.checkpoint_dir.string()},
        {"splits", c.splits_file.string()}}},
      {"seed", c.seed},
      {"structsim",
       {{"blocks", c.sim_arch.blocks},
        {"channels", c.sim_arch.channels},
        {"heads", c.sim_arch.heads},
        {"components", c.sim_arch.components},
        {"window_rows", c.sim_arch.window_rows},
        {"input_rows_up", c.sim_arch.input_rows_up},
        {"input_half_width", c.sim_arch.input_half_width},
        {"block_half_width", c.sim_arch.block_half_width},
        {"linear_skip", c.sim_arch.linear_skip},
        {"attention", c.sim_arch.attention},
        {"epochs", c.sim_train.epochs},
        {"batch_size", c.sim_train.batch_size},
        {"learning_rate", c.sim_train.learning_rate},
        {"final_lr_fraction", c.sim_train.final_lr_fraction},
        {"clip_norm", c.sim_train.clip_norm},
        {"max_windows_per_epoch", c.sim_train.max_windows_per_epoch},
        {"margin", c.sim_train.margin},
        {"train_stride", c.sim_train_stride},
        {"heldout_stride", c.sim_heldout_stride}}},
      {"nowcast",
       {{"conv_channels", c.now_arch.conv_channels},
        {"fc_width", c.now_arch.fc_width},
        {"head_width", c.now_arch.head_width},
        {"epochs", c.now_train.epochs},
        {"batch_size", c.now_train.batch_size},
        {"learning_rate", c.now_train.learning_rate},
        {"clip_norm", c.now_train.clip_norm},
        {"thirteen_deltas", c.features.thirteen_deltas}}},
      {"ensemble", {{"members", c.members}, {"hovmoller_members", c.hovmoller_members}, {"chain", chain_policy_name(c.chain)}}},
      {"synth",
       {{"storms", c.synth_storms},
        {"min_duration_h", c.synth.min_duration_h},
        {"max_duration_h", c.synth.max_duration_h},
        {"pixel_km", c.synth.pixel_km},
        {"extent", c.synth.extent},
        {"structure_noise_degc", c.synth.structure_noise_degc}}},
      {"format", {{"tables", c.csv_tables ? "csv" : "text"}}},
  };
}

}  // namespace

void RunConfig::validate() const {
  const auto fail = [](const std::string& m) { throw Error(ErrorCode::config, "config: " + m); };
  if (output_dir.empty()) fail("paths.output must not be empty");
  if (data_dir.empty()) fail("paths.data must not be empty");
  try {
    sim_arch.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (sim_train.epochs < 0 || sim_train.batch_size < 1) fail("structsim epochs/batch_size out of range");
  if (!(sim_train.learning_rate > 0.0) || !(sim_train.final_lr_fraction > 0.0) || sim_train.final_lr_fraction > 1.0) {
    fail("structsim learning rate schedule out of range");
  }
  if (!(sim_train.margin > 0.0)) fail("structsim.margin must be positive");
  if (sim_train_stride < 1 || sim_heldout_stride < 1) fail("structsim strides must be positive");
  for (int c : now_arch.conv_channels) {
    if (c < 1) fail("nowcast.conv_channels must be positive");
  }
  if (now_arch.fc_width < 1 || now_arch.head_width < 1) fail("nowcast widths must be positive");
  if (now_train.epochs < 0 || now_train.batch_size < 1 || !(now_train.learning_rate > 0.0)) {
    fail("nowcast training settings out of range");
  }
  if (members < 1) fail("ensemble.members must be at least 1");
  if (hovmoller_members < 0) fail("ensemble.hovmoller_members must be non-negative");
  if (synth_storms < 3) fail("synth.storms must be at least 3");
  if (!(synth.min_duration_h >= 48.0) || synth.max_duration_h < synth.min_duration_h) fail("synth durations out of range");
  if (!(synth.pixel_km > 0.0) || synth.extent < 3 || synth.extent % 2 == 0) fail("synth grid must be odd and positive");
  if (!(synth.structure_noise_degc >= 0.0)) fail("synth.structure_noise_degc must be non-negative");
}

std::filesystem::path RunConfig::checkpoints() const {
  return checkpoint_dir.empty() ? output_dir / "checkpoints" : checkpoint_dir;
}

std::filesystem::path RunConfig::splits() const { return splits_file.empty() ? data_dir / "splits.json" : splits_file; }

RunConfig parse_config(const std::string& json_text, const RunConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, std::string("config: malformed JSON: ") + e.what());
  }
  reject_unknown(j, "", {"paths", "seed", "structsim", "nowcast", "ensemble", "synth", "format"});
  RunConfig c = base;
  if (j.contains("paths")) {
    const json& p = j["paths"];
    reject_unknown(p, "paths", {"data", "output", "checkpoints", "splits"});
    read_path(p, "data", c.data_dir, "paths");
    read_path(p, "output", c.output_dir, "paths");
    read_path(p, "checkpoints", c.checkpoint_dir, "paths");
    read_path(p, "splits", c.splits_file, "paths");
  }
  read(j, "seed", c.seed, "");
  if (j.contains("structsim")) {
    const json& s = j["structsim"];
    const std::string w = "structsim";
    reject_unknown(s, w,
                   {"blocks", "channels", "heads", "components", "window_rows", "input_rows_up", "input_half_width",
                    "block_half_width", "linear_skip", "attention", "epochs", "batch_size", "learning_rate", "final_lr_fraction",
                    "clip_norm", "max_windows_per_epoch", "margin", "train_stride", "heldout_stride"});
    read(s, "blocks", c.sim_arch.blocks, w);
    read(s, "channels", c.sim_arch.channels, w);
    read(s, "heads", c.sim_arch.heads, w);
    read(s, "components", c.sim_arch.components, w);
    read(s, "window_rows", c.sim_arch.window_rows, w);
    read(s, "input_rows_up", c.sim_arch.input_rows_up, w);
    read(s, "input_half_width", c.sim_arch.input_half_width, w);
    read(s, "block_half_width", c.sim_arch.block_half_width, w);
    read(s, "linear_skip", c.sim_arch.linear_skip, w);
    read(s, "attention", c.sim_arch.attention, w);
    read(s, "epochs", c.sim_train.epochs, w);
    read(s, "batch_size", c.sim_train.batch_size, w);
    read(s, "learning_rate", c.sim_train.learning_rate, w);
    read(s, "final_lr_fraction", c.sim_train.final_lr_fraction, w);
    read(s, "clip_norm", c.sim_train.clip_norm, w);
    read(s, "max_windows_per_epoch", c.sim_train.max_windows_per_epoch, w);
    read(s, "margin", c.sim_train.margin, w);
    read(s, "train_stride", c.sim_train_stride, w);
    read(s, "heldout_stride", c.sim_heldout_stride, w);
  }
  if (j.contains("nowcast")) {
    const json& n = j["nowcast"];
    const std::string w = "nowcast";
    reject_unknown(n, w,
                   {"conv_channels", "fc_width", "head_width", "epochs", "batch_size", "learning_rate", "clip_norm",
                    "thirteen_deltas"});
    read(n, "conv_channels", c.now_arch.conv_channels, w);
    read(n, "fc_width", c.now_arch.fc_width, w);
    read(n, "head_width", c.now_arch.head_width, w);
    read(n, "epochs", c.now_train.epochs, w);
    read(n, "batch_size", c.now_train.batch_size, w);
    read(n, "learning_rate", c.now_train.learning_rate, w);
    read(n, "clip_norm", c.now_train.clip_norm, w);
    read(n, "thirteen_deltas", c.features.thirteen_deltas, w);
  }
  if (j.contains("ensemble")) {
    const json& e = j["ensemble"];
    reject_unknown(e, "ensemble", {"members", "hovmoller_members", "chain"});
    read(e, "members", c.members, "ensemble");
    read(e, "hovmoller_members", c.hovmoller_members, "ensemble");
    std::string chain = chain_policy_name(c.chain);
    read(e, "chain", chain, "ensemble");
    try {
      c.chain = parse_chain_policy(chain);
    } catch (const Error& err) {
      throw Error(ErrorCode::config, std::string("config: ensemble.chain: ") + err.what());
    }
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    const std::string w = "synth";
    reject_unknown(s, w, {"storms", "min_duration_h", "max_duration_h", "pixel_km", "extent", "structure_noise_degc"});
    read(s, "storms", c.synth_storms, w);
    read(s, "min_duration_h", c.synth.min_duration_h, w);
    read(s, "max_duration_h", c.synth.max_duration_h, w);
    read(s, "pixel_km", c.synth.pixel_km, w);
    read(s, "extent", c.synth.extent, w);
    read(s, "structure_noise_degc", c.synth.structure_noise_degc, w);
  }
  if (j.contains("format")) {
    const json& f = j["format"];
    reject_unknown(f, "format", {"tables"});
    std::string tables = c.csv_tables ? "csv" : "text";
    read(f, "tables", tables, "format");
    if (tables != "csv" && tables != "text") throw Error(ErrorCode::config, "config: format.tables must be text or csv");
    c.csv_tables = tables == "csv";
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const RunConfig& config) { return to_json(config).dump(2); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& config) { return fnv1a_hex(to_json(config).dump()); }

}  // namespace tcsf
