#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "../support/nowcast_fixture.hpp"
#include "../support/pipeline_fixture.hpp"
#include "tcsf/app.hpp"
#include "tcsf/common.hpp"

using namespace tcsf;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tcsf_test_app_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const RunConfig d = parse_config("{}");
  CHECK(d.data_dir == "data");
  CHECK(d.output_dir == "out");
  CHECK(d.checkpoints() == fs::path("out") / "checkpoints");
  CHECK(d.splits() == fs::path("data") / "splits.json");
  CHECK(d.members == 16);
  CHECK(d.seed == 1);

  const RunConfig c = parse_config(R"({"paths": {"output": "/tmp/x"}, "seed": 42,
      "structsim": {"channels": 16, "attention": false}, "nowcast": {"thirteen_deltas": true},
      "ensemble": {"members": 8, "chain": "ensemble_mean"}, "format": {"tables": "csv"}})");
  CHECK(c.output_dir == "/tmp/x");
  CHECK(c.seed == 42);
  CHECK(c.sim_arch.channels == 16);
  CHECK_FALSE(c.sim_arch.attention);
  CHECK(c.features.thirteen_deltas);
  CHECK(c.members == 8);
  CHECK(c.chain == ChainPolicy::ensemble_mean);
  CHECK(c.csv_tables);
  CHECK(c.sim_arch.blocks == d.sim_arch.blocks);

  // Later layers override earlier ones; untouched keys survive.
  const RunConfig layered = parse_config(R"({"ensemble": {"members": 4}})", c);
  CHECK(layered.members == 4);
  CHECK(layered.seed == 42);
}

TEST_CASE("config errors") {
  CHECK(code_of([] { parse_config(R"({"sed": 1})"); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config(R"({"structsim": {"chanels": 3}})"); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config(R"({"seed": "one"})"); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config(R"({"format": {"tables": "xml"}})"); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config(R"({"ensemble": {"members": 0}})").validate(); }) == ErrorCode::config);
  CHECK(code_of([] { parse_config(R"({"structsim": {"channels": 7, "heads": 2}})").validate(); }) == ErrorCode::config);
  CHECK(code_of([] { load_config("/nonexistent/tcsf.json"); }) != ErrorCode::internal);
}

TEST_CASE("canonical config text and hash") {
  RunConfig c;
  c.seed = 9;
  c.sim_train.epochs = 3;
  const std::string text = format_config(c);
  const RunConfig back = parse_config(text);
  CHECK(format_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  RunConfig d = c;
  d.members = 15;
  CHECK(config_hash(d) != config_hash(c));

  // Published FNV-1a 64 test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("structsim checkpoints round trip") {
  const fs::path dir = scratch("ckpt");
  StructSimModel m = fixtures::tiny_structsim(4);
  m.log.push_back({1, 0.5, 0.25});
  m.seed = 4;
  save_structsim(m, dir / "s.ckpt");
  CHECK(checkpoint_payload(dir / "s.ckpt") == "structsim");
  const StructSimModel back = load_structsim(dir / "s.ckpt");
  CHECK(back.arch == m.arch);
  CHECK(back.scaling.t_min == m.scaling.t_min);
  CHECK(back.scaling.t_max == m.scaling.t_max);
  CHECK(back.seed == 4);
  REQUIRE(back.log.size() == 1);
  CHECK(back.log[0].heldout_nll == 0.25);
  const auto pa = m.network.params();
  const auto pb = back.network.params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);

  CHECK(code_of([&] { load_nowcast(dir / "s.ckpt"); }) != ErrorCode::internal);

  // Truncation and trailing bytes are both rejected.
  const std::string bytes = slurp(dir / "s.ckpt");
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  CHECK_THROWS_AS(load_structsim(dir / "short.ckpt"), Error);
  std::ofstream(dir / "long.ckpt", std::ios::binary) << bytes << "xx";
  CHECK_THROWS_AS(load_structsim(dir / "long.ckpt"), Error);
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << "not-a-checkpoint\n{}";
  CHECK_THROWS_AS(load_structsim(dir / "bad.ckpt"), Error);
  fs::remove_all(dir);
}

TEST_CASE("nowcast checkpoints round trip") {
  const fs::path dir = scratch("nckpt");
  NowcastModel m = fixtures::live_nowcast_model(5, {true});
  m.log.push_back({2, 3.0, 4.0});
  save_nowcast(m, dir / "n.ckpt");
  CHECK(checkpoint_payload(dir / "n.ckpt") == "nowcast");
  const NowcastModel back = load_nowcast(dir / "n.ckpt");
  CHECK(back.arch == m.arch);
  CHECK(back.features == m.features);
  CHECK(back.image_mean == m.image_mean);
  CHECK(back.persistence_std == m.persistence_std);
  CHECK(back.target_mean == m.target_mean);
  const NowcastFeatures f = fixtures::patterned_features(0.3, 0.5, {true});
  CHECK(predict_now(back, f) == predict_now(m, f));
  CHECK_THROWS_AS(load_structsim(dir / "n.ckpt"), Error);
  CHECK_THROWS_AS(load_nowcast(dir / "missing.ckpt"), Error);
  fs::remove_all(dir);
}

TEST_CASE("output lock is exclusive") {
  const fs::path dir = scratch("lock");
  {
    OutputLock a(dir);
    CHECK(fs::exists(dir / ".tcsf.lock"));
    CHECK(code_of([&] { OutputLock b(dir); }) == ErrorCode::state);
  }
  CHECK_FALSE(fs::exists(dir / ".tcsf.lock"));
  OutputLock again(dir);
  fs::remove_all(dir);
}

TEST_CASE("manifests describe every file") {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "a.txt") << "hello";
  Manifest m;
  m.command = "demo";
  m.config_hash = "0123456789abcdef";
  m.seed = 3;
  m.arguments = {"lead=6"};
  m.inputs = {dir / "a.txt"};
  m.outputs = {dir / "a.txt"};
  const fs::path p = write_manifest(m, dir);
  CHECK(p == dir / "manifests" / "demo.json");
  const auto j = nlohmann::json::parse(slurp(p));
  CHECK(j["command"] == "demo");
  CHECK(j["version"] == version_string());
  CHECK(j["seed"] == 3);
  CHECK(j["inputs"][0]["bytes"] == 5);
  CHECK(j["outputs"][0]["fnv1a"] == fnv1a_hex("hello"));
  fs::remove_all(dir);
}

TEST_CASE("commands reject bad input before touching the output dir") {
  const fs::path dir = fs::temp_directory_path() / "tcsf_test_app_cmd";
  fs::remove_all(dir);
  RunConfig c;
  c.output_dir = dir;
  c.members = 0;
  CHECK(code_of([&] { run_command("forecast", c, {}); }) == ErrorCode::config);
  CHECK_FALSE(fs::exists(dir));
  c.members = 4;
  CHECK(code_of([&] { run_command("frobnicate", c, {}); }) == ErrorCode::invalid_argument);
  CommandArgs bad;
  bad.lead = 9;
  CHECK(code_of([&] { run_command("forecast", c, bad); }) == ErrorCode::invalid_argument);
  CHECK_FALSE(fs::exists(dir));
  CHECK(command_names().size() == 9);
}
