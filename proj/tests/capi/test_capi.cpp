#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "tcsf/tcsf.h"

namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "seed": 5,
  "synth": {"storms": 3, "min_duration_h": 54, "max_duration_h": 60},
  "structsim": {"blocks": 1, "channels": 8, "heads": 2, "components": 2, "epochs": 1,
                "batch_size": 2, "max_windows_per_epoch": 4, "heldout_stride": 19},
  "nowcast": {"conv_channels": [4, 4, 4], "fc_width": 8, "head_width": 8, "epochs": 1},
  "ensemble": {"members": 2, "hovmoller_members": 1}
})";

struct Config {
  tcsf_config* ptr = nullptr;
  Config() { REQUIRE(tcsf_config_new(&ptr) == TCSF_OK); }
  ~Config() { tcsf_config_free(ptr); }
};

fs::path scratch(const char* name) {
  const fs::path p = fs::path(TCSF_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

tcsf_status run(const tcsf_config* c, const char* cmd, const tcsf_command_args* args = nullptr) {
  tcsf_result* r = nullptr;
  const tcsf_status s = tcsf_run_command(c, cmd, args, &r);
  if (s == TCSF_OK) {
    CHECK(r != nullptr);
    CHECK(tcsf_result_output_count(r) > 0);
    CHECK(tcsf_result_output(r, tcsf_result_output_count(r)) == nullptr);
    tcsf_result_free(r);
  } else {
    const std::string msg = std::string(cmd) + ": " + tcsf_last_error();
    MESSAGE(msg);
  }
  return s;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(tcsf_version()) == "0.1.0");
  CHECK(std::string(tcsf_status_name(TCSF_OK)) == "ok");
  CHECK(std::string(tcsf_status_name(TCSF_ERR_CONFIG)) == "config");
  CHECK(std::string(tcsf_status_name(static_cast<tcsf_status>(99))) == "unknown");
}

TEST_CASE("configuration through the C interface") {
  Config c;
  CHECK(tcsf_config_validate(c.ptr) == TCSF_OK);
  char before[17];
  REQUIRE(tcsf_config_hash(c.ptr, before, sizeof before) == TCSF_OK);
  CHECK(std::strlen(before) == 16);
  char tiny[8];
  CHECK(tcsf_config_hash(c.ptr, tiny, sizeof tiny) == TCSF_ERR_INVALID_ARGUMENT);

  REQUIRE(tcsf_config_merge_json(c.ptr, R"({"ensemble": {"members": 3}})") == TCSF_OK);
  char after[17];
  REQUIRE(tcsf_config_hash(c.ptr, after, sizeof after) == TCSF_OK);
  CHECK(std::string(before) != std::string(after));

  char* dump = nullptr;
  REQUIRE(tcsf_config_dump(c.ptr, &dump) == TCSF_OK);
  CHECK(std::string(dump).find("\"members\": 3") != std::string::npos);
  tcsf_string_free(dump);

  CHECK(tcsf_config_merge_json(c.ptr, R"({"ensemble": {"size": 3}})") == TCSF_ERR_CONFIG);
  CHECK(std::string(tcsf_last_error()).find("size") != std::string::npos);
  CHECK(tcsf_config_merge_json(c.ptr, "{oops") == TCSF_ERR_CONFIG);

  REQUIRE(tcsf_config_merge_json(c.ptr, R"({"ensemble": {"members": 0}})") == TCSF_OK);
  CHECK(tcsf_config_validate(c.ptr) == TCSF_ERR_CONFIG);

  CHECK(tcsf_config_new(nullptr) == TCSF_ERR_INVALID_ARGUMENT);
  tcsf_config* missing = nullptr;
  CHECK(tcsf_config_load("/nonexistent/tcsf.json", &missing) != TCSF_OK);
  CHECK(missing == nullptr);
}

TEST_CASE("command errors") {
  Config c;
  const fs::path out = scratch("capi_errors");
  fs::remove_all(out);
  REQUIRE(tcsf_config_set_paths(c.ptr, nullptr, out.c_str()) == TCSF_OK);
  tcsf_result* r = nullptr;
  CHECK(tcsf_run_command(c.ptr, "nonsense", nullptr, &r) == TCSF_ERR_INVALID_ARGUMENT);
  CHECK(r == nullptr);
  tcsf_command_args args;
  tcsf_command_args_init(&args);
  args.lead_h = 7;
  CHECK(tcsf_run_command(c.ptr, "forecast", &args, &r) == TCSF_ERR_INVALID_ARGUMENT);
  args.lead_h = 6;
  args.time = "yesterday";
  CHECK(tcsf_run_command(c.ptr, "forecast", &args, &r) != TCSF_OK);
  CHECK_FALSE(fs::exists(out));
  CHECK(tcsf_run_command(nullptr, "forecast", nullptr, &r) == TCSF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("intensity score") {
  const double p[] = {50, 60, 70};
  const double t[] = {52, 60, 67};
  double rmse = 0, mae = 0, bias = 0;
  REQUIRE(tcsf_intensity_score(p, t, 3, &rmse, &mae, &bias) == TCSF_OK);
  CHECK(rmse == doctest::Approx(std::sqrt(13.0 / 3.0)));
  CHECK(mae == doctest::Approx(5.0 / 3.0));
  CHECK(bias == doctest::Approx(1.0 / 3.0));
  CHECK(tcsf_intensity_score(p, t, 0, &rmse, &mae, &bias) == TCSF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("tiny end-to-end run and model calls") {
  const fs::path root = scratch("capi_run");
  Config c;
  REQUIRE(tcsf_config_merge_json(c.ptr, kTinyConfig) == TCSF_OK);
  REQUIRE(tcsf_config_set_paths(c.ptr, (root / "data").c_str(), (root / "out").c_str()) == TCSF_OK);
  for (const char* cmd : {"synth", "ingest", "extract-orb", "train-sim", "train-nowcast"}) {
    REQUIRE(run(c.ptr, cmd) == TCSF_OK);
    CHECK(fs::exists(root / "out" / "manifests" / (std::string(cmd) + ".json")));
  }
  CHECK_FALSE(fs::exists(root / "out" / ".tcsf.lock"));

  tcsf_structsim* sim = nullptr;
  REQUIRE(tcsf_structsim_load((root / "out" / "checkpoints" / "structsim.ckpt").c_str(), &sim) == TCSF_OK);
  tcsf_nowcast* now = nullptr;
  REQUIRE(tcsf_nowcast_load((root / "out" / "checkpoints" / "nowcast.ckpt").c_str(), &now) == TCSF_OK);
  CHECK(tcsf_nowcast_load((root / "out" / "checkpoints" / "structsim.ckpt").c_str(), &now) != TCSF_OK);

  const std::size_t cells = TCSF_RADIAL_BINS * TCSF_QUADRANTS;
  std::vector<double> obs(13 * cells);
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = -60.0 + 0.5 * static_cast<double>((i / TCSF_QUADRANTS) % TCSF_RADIAL_BINS);
  std::vector<double> a(2 * 3 * cells), b(2 * 3 * cells);
  REQUIRE(tcsf_structsim_simulate(sim, obs.data(), 3, 2, 11, a.data()) == TCSF_OK);
  REQUIRE(tcsf_structsim_simulate(sim, obs.data(), 3, 2, 11, b.data()) == TCSF_OK);
  CHECK(a == b);
  for (double v : a) CHECK(std::isfinite(v));
  CHECK(tcsf_structsim_simulate(sim, obs.data(), 0, 2, 11, a.data()) != TCSF_OK);
  CHECK(tcsf_structsim_simulate(sim, obs.data(), 3, 0, 11, a.data()) != TCSF_OK);

  double nll = 0.0;
  // simulated rows lie inside the model's temperature scaling
  REQUIRE(tcsf_structsim_nll(sim, a.data(), 3, &nll) == TCSF_OK);
  CHECK(std::isfinite(nll));
  std::vector<double> cold(3 * cells, -500.0);
  CHECK(tcsf_structsim_nll(sim, cold.data(), 3, &nll) == TCSF_ERR_DOMAIN);
  CHECK(tcsf_structsim_nll(sim, obs.data(), 40, &nll) != TCSF_OK);

  const std::size_t np = tcsf_nowcast_persistence_size(now);
  CHECK(np == 10);
  std::vector<double> pers{40, 42, 44, 46, 48, 0.5, 0.5, 0.5, 0.5, 0.5};
  double kt = -1.0;
  REQUIRE(tcsf_nowcast_predict(now, obs.data(), pers.data(), np, &kt) == TCSF_OK);
  CHECK(kt >= 0.0);
  CHECK(kt <= 200.0);
  CHECK(tcsf_nowcast_predict(now, obs.data(), pers.data(), np - 1, &kt) == TCSF_ERR_SHAPE);

  tcsf_structsim_free(sim);
  tcsf_nowcast_free(now);
  fs::remove_all(root);
}
