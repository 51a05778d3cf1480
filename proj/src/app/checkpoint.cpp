#include <bit>
#include <fstream>

#include "json.hpp"
#include "tcsf/app.hpp"
#include "tcsf/common.hpp"

namespace tcsf {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoints are written little-endian");

namespace {

// Layout: format tag line, one-line JSON header, raw float64 parameter values
// in header order.
void write_checkpoint(const fs::path& path, json header, const std::vector<const nn::Param*>& params) {
  json list = json::array();
  for (const nn::Param* p : params) list.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  header["params"] = list;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "checkpoint: cannot write " + path.string());
  out << kCheckpointFormat << '\n' << header.dump() << '\n';
  for (const nn::Param* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()), static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorCode::io, "checkpoint: write failed for " + path.string());
}

struct Loaded {
  json header;
  std::ifstream body;
};

Loaded open_checkpoint(const fs::path& path, const std::string& payload) {
  Loaded l;
  l.body.open(path, std::ios::binary);
  if (!l.body) throw Error(ErrorCode::io, "checkpoint: cannot read " + path.string());
  std::string tag, header;
  std::getline(l.body, tag);
  if (tag != kCheckpointFormat) throw Error(ErrorCode::parse, "checkpoint: " + path.string() + " is not a " + kCheckpointFormat + " file");
  std::getline(l.body, header);
  try {
    l.header = json::parse(header);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("checkpoint: bad header: ") + e.what());
  }
  if (!payload.empty() && l.header.value("payload", "") != payload) {
    throw Error(ErrorCode::parse, "checkpoint: " + path.string() + " holds " + l.header.value("payload", "?") +
                                      ", expected " + payload);
  }
  return l;
}

void read_params(Loaded& l, const std::vector<nn::Param*>& params) {
  const json& list = l.header.at("params");
  if (list.size() != params.size()) throw Error(ErrorCode::parse, "checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::Param& p = *params[i];
    if (list[i].at("name") != p.name || list[i].at("rows") != p.value.rows() || list[i].at("cols") != p.value.cols()) {
      throw Error(ErrorCode::parse, "checkpoint: parameter " + p.name + " does not match the architecture");
    }
    l.body.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    if (!l.body) throw Error(ErrorCode::parse, "checkpoint: truncated at parameter " + p.name);
  }
  if (l.body.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::parse, "checkpoint: trailing bytes");
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::parse, std::string("checkpoint: missing or bad field ") + key);
  }
}

}  // namespace

void save_structsim(const StructSimModel& model, const fs::path& path) {
  const auto& a = model.arch;
  json log = json::array();
  for (const auto& e : model.log) log.push_back({e.epoch, e.train_nll, e.heldout_nll});
  json header{{"payload", "structsim"},
              {"arch",
               {{"blocks", a.blocks},
                {"channels", a.channels},
                {"heads", a.heads},
                {"components", a.components},
                {"window_rows", a.window_rows},
                {"input_rows_up", a.input_rows_up},
                {"input_half_width", a.input_half_width},
                {"block_half_width", a.block_half_width},
                {"linear_skip", a.linear_skip},
                {"attention", a.attention}}},
              {"scaling", {{"t_min", model.scaling.t_min}, {"t_max", model.scaling.t_max}, {"margin", model.scaling.margin}}},
              {"seed", model.seed},
              {"log", log}};
  write_checkpoint(path, header, model.network.params());
}

StructSimModel load_structsim(const fs::path& path) {
  Loaded l = open_checkpoint(path, "structsim");
  const json& a = l.header.at("arch");
  StructSimArchitecture arch;
  arch.blocks = get<int>(a, "blocks");
  arch.channels = get<int>(a, "channels");
  arch.heads = get<int>(a, "heads");
  arch.components = get<int>(a, "components");
  arch.window_rows = get<int>(a, "window_rows");
  arch.input_rows_up = get<int>(a, "input_rows_up");
  arch.input_half_width = get<int>(a, "input_half_width");
  arch.block_half_width = get<int>(a, "block_half_width");
  arch.linear_skip = get<bool>(a, "linear_skip");
  arch.attention = get<bool>(a, "attention");
  const json& s = l.header.at("scaling");
  ScalingSpec scaling{get<double>(s, "t_min"), get<double>(s, "t_max"), get<double>(s, "margin")};
  StructSimModel m = make_structsim_model(arch, scaling, get<std::uint64_t>(l.header, "seed"));
  for (const auto& e : l.header.at("log")) m.log.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
  read_params(l, m.network.params());
  return m;
}

void save_nowcast(const NowcastModel& model, const fs::path& path) {
  json log = json::array();
  for (const auto& e : model.log) log.push_back({e.epoch, e.train_mse, e.heldout_mse});
  json header{{"payload", "nowcast"},
              {"arch",
               {{"conv_channels", model.arch.conv_channels},
                {"fc_width", model.arch.fc_width},
                {"head_width", model.arch.head_width}}},
              {"thirteen_deltas", model.features.thirteen_deltas},
              {"image_mean", model.image_mean},
              {"image_std", model.image_std},
              {"persistence_mean", model.persistence_mean},
              {"persistence_std", model.persistence_std},
              {"target_mean", model.target_mean},
              {"target_std", model.target_std},
              {"seed", model.seed},
              {"log", log}};
  write_checkpoint(path, header, model.network.params());
}

NowcastModel load_nowcast(const fs::path& path) {
  Loaded l = open_checkpoint(path, "nowcast");
  const json& a = l.header.at("arch");
  NowcastArchitecture arch;
  arch.conv_channels = get<std::array<int, 3>>(a, "conv_channels");
  arch.fc_width = get<int>(a, "fc_width");
  arch.head_width = get<int>(a, "head_width");
  NowcastFeatureConfig features{get<bool>(l.header, "thirteen_deltas")};
  NowcastModel m = make_nowcast_model(arch, features, get<std::uint64_t>(l.header, "seed"));
  m.image_mean = get<std::array<double, kQuadrants>>(l.header, "image_mean");
  m.image_std = get<std::array<double, kQuadrants>>(l.header, "image_std");
  m.persistence_mean = get<std::vector<double>>(l.header, "persistence_mean");
  m.persistence_std = get<std::vector<double>>(l.header, "persistence_std");
  m.target_mean = get<double>(l.header, "target_mean");
  m.target_std = get<double>(l.header, "target_std");
  if (static_cast<int>(m.persistence_mean.size()) != features.persistence_size() ||
      m.persistence_std.size() != m.persistence_mean.size()) {
    throw Error(ErrorCode::parse, "checkpoint: persistence statistics do not match the feature config");
  }
  for (const auto& e : l.header.at("log")) m.log.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
  read_params(l, m.network.params());
  return m;
}

std::string checkpoint_payload(const fs::path& path) {
  Loaded l = open_checkpoint(path, "");
  return l.header.value("payload", "");
}

}  // namespace tcsf
