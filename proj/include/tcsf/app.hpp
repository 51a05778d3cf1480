#pragma once

// Run configuration, checkpoints, manifests and the command layer behind the CLI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcsf/nowcast.hpp"
#include "tcsf/pipeline.hpp"
#include "tcsf/structsim.hpp"
#include "tcsf/synth.hpp"

namespace tcsf {

// ---- configuration ------------------------------------------------------------------

struct RunConfig {
  std::filesystem::path data_dir = "data";       // raw inputs (synth writes here)
  std::filesystem::path output_dir = "out";      // every derived artifact
  std::filesystem::path checkpoint_dir;          // empty: <output_dir>/checkpoints
  std::filesystem::path splits_file;             // empty: <data_dir>/splits.json
  std::uint64_t seed = 1;

  StructSimArchitecture sim_arch;
  StructSimTrainConfig sim_train;
  int sim_train_stride = 1;
  int sim_heldout_stride = 19;

  NowcastArchitecture now_arch;
  NowcastTrainConfig now_train;
  NowcastFeatureConfig features;

  int members = 16;
  int hovmoller_members = 4;
  ChainPolicy chain = ChainPolicy::member;

  int synth_storms = 10;
  SynthCorpusOptions synth;

  bool csv_tables = false;

  void validate() const;
  std::filesystem::path checkpoints() const;
  std::filesystem::path splits() const;
};

// Keys not in the schema are rejected. Missing keys keep their defaults.
RunConfig parse_config(const std::string& json_text, const RunConfig& base = {});
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});
// Canonical JSON with every key.
std::string format_config(const RunConfig& config);
// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);
std::string fnv1a_hex(const std::string& bytes);

// ---- checkpoints ----------------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "tcsf-checkpoint/1";

void save_structsim(const StructSimModel& model, const std::filesystem::path& path);
StructSimModel load_structsim(const std::filesystem::path& path);
void save_nowcast(const NowcastModel& model, const std::filesystem::path& path);
NowcastModel load_nowcast(const std::filesystem::path& path);
// Payload tag of a checkpoint ("structsim" or "nowcast").
std::string checkpoint_payload(const std::filesystem::path& path);

// ---- manifests ----------------------------------------------------------------------

// Advisory lock on an output directory: <dir>/.tcsf.lock, created exclusively.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> arguments;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

// <output_dir>/manifests/<command>.json with file sizes and FNV-1a digests.
std::filesystem::path write_manifest(const Manifest& manifest, const std::filesystem::path& output_dir);

const char* version_string();

// ---- commands -------------------------------------------------------------------------

struct CommandArgs {
  std::optional<std::string> storm;
  std::optional<UtcTime> time;
  std::optional<int> lead;
  std::optional<int> members;
  std::optional<std::uint64_t> seed;
  std::string split = "test";                    // storms for bulk forecasts
  std::optional<std::filesystem::path> records;  // verify input
};

struct CommandResult {
  std::vector<std::filesystem::path> outputs;
  std::string summary;
};

// Validates the config, takes the output lock, runs the command and writes its manifest.
CommandResult run_command(const std::string& command, const RunConfig& config, const CommandArgs& args);
const std::vector<std::string>& command_names();

}  // namespace tcsf
