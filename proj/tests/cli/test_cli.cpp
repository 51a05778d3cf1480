#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "seed": 5,
  "synth": {"storms": 3, "min_duration_h": 72, "max_duration_h": 78},
  "structsim": {"blocks": 1, "channels": 8, "heads": 2, "components": 2, "epochs": 1,
                "batch_size": 2, "max_windows_per_epoch": 4, "heldout_stride": 19},
  "nowcast": {"conv_channels": [4, 4, 4], "fc_width": 8, "head_width": 8, "epochs": 1},
  "ensemble": {"members": 2, "hovmoller_members": 1},
  "format": {"tables": "csv"}
})";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const char* name) {
  const fs::path p = fs::path(TCSF_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// `env` is a prefix such as "TCSF_CONFIG=... "; pass "env -u TCSF_CONFIG " to clear it.
Run tcsf(const std::vector<std::string>& args, const std::string& env = "env -u TCSF_CONFIG ") {
  const fs::path err = fs::path(TCSF_SCRATCH) / "cli_stderr.txt";
  std::string cmd = env + quote(TCSF_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>" + quote(err.string());
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("errors use one machine-readable line and a nonzero exit") {
  const fs::path root = scratch("cli_errors");
  const fs::path out = root / "out";
  auto r = tcsf({"--output", out.string(), "--set", R"({"ensemble": {"members": 0}})", "synth"});
  CHECK(r.code == 4);
  CHECK(r.err.rfind("tcsf-error code=config status=4 msg=\"", 0) == 0);
  CHECK(r.err.back() == '\n');
  CHECK(lines(r.err).size() == 1);
  CHECK_FALSE(fs::exists(out));

  r = tcsf({"--output", out.string(), "--set", R"({"ensembel": {}})", "synth"});
  CHECK(r.code == 4);
  CHECK(r.err.find("ensembel") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  r = tcsf({"--output", out.string(), "forecast", "--lead", "7"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("tcsf-error code=invalid_argument status=1 msg=\"", 0) == 0);
  CHECK_FALSE(fs::exists(out));

  r = tcsf({"-c", (root / "missing.json").string(), "synth"});
  CHECK(r.code != 0);
  CHECK(r.err.rfind("tcsf-error code=", 0) == 0);

  r = tcsf({"--output", out.string(), "verify"});
  CHECK(r.code == 7);
  CHECK(r.err.rfind("tcsf-error code=state status=7 msg=\"", 0) == 0);
}

TEST_CASE("config file, environment and --set precedence") {
  const fs::path root = scratch("cli_precedence");
  spit(root / "env.json", R"({"ensemble": {"members": 3}})");
  spit(root / "flag.json", R"({"ensemble": {"members": 5}})");
  spit(root / "broken.json", "{not json");
  const std::string out = (root / "out").string();
  const std::string env = "TCSF_CONFIG=" + quote((root / "env.json").string()) + " ";

  auto r = tcsf({"--output", out, "--print-config", "verify"}, env);
  CHECK(r.out.find("\"members\": 3") != std::string::npos);

  r = tcsf({"--output", out, "-c", (root / "flag.json").string(), "--print-config", "verify"}, env);
  CHECK(r.out.find("\"members\": 5") != std::string::npos);

  r = tcsf({"--output", out, "--set", R"({"ensemble": {"members": 9}})", "--print-config", "verify"}, env);
  CHECK(r.out.find("\"members\": 9") != std::string::npos);

  r = tcsf({"--output", out, "--print-config", "verify"},
           "TCSF_CONFIG=" + quote((root / "broken.json").string()) + " ");
  CHECK(r.code == 4);
  CHECK(r.out.empty());
}

TEST_CASE("verify on a perfect forecast gives zero errors") {
  const fs::path root = scratch("cli_perfect");
  spit(root / "records.csv",
       "storm_id,time,lead_h,prediction,truth,delta6h,shear_kt,shear_dir\n"
       "AL012001,2001-08-03T00:00:00Z,6,30,30,-8,5,45\n"
       "AL012001,2001-08-03T06:00:00Z,6,50,50,0,15,135\n"
       "AL012001,2001-08-03T12:00:00Z,6,80,80,12,25,225\n"
       "AL022001,2001-09-01T18:00:00Z,6,110,110,3,,\n");
  const auto r = tcsf({"--output", (root / "out").string(), "--set", R"({"format": {"tables": "csv"}})", "verify",
                       "--records", (root / "records.csv").string()});
  REQUIRE(r.code == 0);
  const auto table = lines(slurp(root / "out" / "verify" / "records_tables.csv"));
  REQUIRE(table.size() > 2);
  CHECK(table[0] == "table,bin,rmse,mae,bias,n");
  int scored = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream in(table[i] + ",");
    for (std::string cell; std::getline(in, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 6);
    if (f[1] == "unbinned" || f[2].empty()) continue;
    ++scored;
    CHECK(std::stod(f[2]) == 0.0);
    CHECK(std::stod(f[3]) == 0.0);
    CHECK(std::stod(f[4]) == 0.0);
  }
  CHECK(scored >= 5);
}

TEST_CASE("end-to-end run through the command line") {
  const fs::path root = scratch("cli_run");
  spit(root / "tiny.json", kTinyConfig);
  const std::vector<std::string> base{"-c", (root / "tiny.json").string(), "--data", (root / "data").string(),
                                      "--output", (root / "out").string()};
  auto with = [&](std::vector<std::string> more) {
    std::vector<std::string> a = base;
    a.insert(a.end(), more.begin(), more.end());
    return tcsf(a);
  };
  for (const char* cmd : {"synth", "ingest", "extract-orb", "train-sim", "train-nowcast"}) {
    const auto r = with({cmd});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind(std::string(cmd) + ": ", 0) == 0);
    CHECK(r.err.empty());
  }

  auto bulk = with({"forecast", "--split", "test", "--lead", "6", "--members", "4", "--seed", "7"});
  INFO(bulk.err);
  REQUIRE(bulk.code == 0);
  const fs::path guidance = root / "out" / "forecast" / "guidance_6h.jsonl";
  const std::string first = slurp(guidance);
  REQUIRE_FALSE(first.empty());
  bulk = with({"forecast", "--split", "test", "--lead", "6", "--members", "4", "--seed", "7"});
  REQUIRE(bulk.code == 0);
  CHECK(slurp(guidance) == first);

  // storm and anchor of the first bulk case
  const std::string line = lines(first).front();
  const auto field = [&](const std::string& key) {
    const auto at = line.find("\"" + key + "\":\"") + key.size() + 4;
    return line.substr(at, line.find('"', at) - at);
  };
  const std::string storm = field("storm_id");
  const std::string anchor = field("anchor");
  REQUIRE(storm.size() == 8);

  std::string single;
  for (int pass = 0; pass < 2; ++pass) {
    const auto r = with({"forecast", "--storm", storm, "--time", anchor, "--lead", "6", "--members", "16", "--seed", "7"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    fs::path record;
    for (const auto& e : fs::directory_iterator(root / "out" / "forecast")) {
      const std::string name = e.path().filename().string();
      if (name.rfind(storm + "_", 0) == 0 && name.size() > 9 && name.substr(name.size() - 9) == "_6h.jsonl") record = e.path();
    }
    REQUIRE_FALSE(record.empty());
    CHECK(fs::exists(fs::path(record).replace_filename(record.stem().string() + "_histogram.png")));
    if (pass == 0) single = slurp(record);
    else CHECK(slurp(record) == single);
  }
  CHECK(single.find("\"members\":[") != std::string::npos);

  const auto v = with({"verify"});
  INFO(v.err);
  REQUIRE(v.code == 0);
  CHECK(fs::exists(root / "out" / "verify" / "records_6h_tables.csv"));
  CHECK(fs::exists(root / "out" / "manifests" / "verify.json"));
  CHECK_FALSE(fs::exists(root / "out" / ".tcsf.lock"));
}
