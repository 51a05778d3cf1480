// Command-line front end. Links only the C interface.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tcsf/tcsf.h"

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int report(tcsf_status status) {
  std::fprintf(stderr, "tcsf-error code=%s status=%d msg=\"%s\"\n", tcsf_status_name(status), static_cast<int>(status),
               escape(tcsf_last_error()).c_str());
  return static_cast<int>(status);
}

struct Options {
  std::string config_path;
  std::string data_dir;
  std::string output_dir;
  std::string set_json;
  std::string storm;
  std::string time;
  int lead = 0;
  int members = 0;
  std::optional<std::uint64_t> seed;
  std::string split;
  std::string records;
  bool print_config = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tropical-cyclone structural forecasting"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_path, "JSON run config (default: $TCSF_CONFIG)");
  app.add_option("--data", o.data_dir, "Override paths.data");
  app.add_option("--output", o.output_dir, "Override paths.output");
  app.add_option("--set", o.set_json, "JSON fragment applied over the config file");
  app.add_flag("--print-config", o.print_config, "Print the effective config before running");

  const char* commands[][2] = {
      {"synth", "Generate a synthetic corpus under the data dir"},
      {"ingest", "Parse best tracks, CARQ intensities and SHIPS shear"},
      {"extract-orb", "Reduce stamps to quadrant radial profiles"},
      {"train-sim", "Train the structural generative model"},
      {"train-nowcast", "Train the intensity nowcaster"},
      {"forecast", "Ensemble forecast for one case or a whole split"},
      {"verify", "Binned intensity verification tables"},
      {"explain", "Gradient saliency and channel attribution for one nowcast"},
      {"render", "Hovmoller image of the observed trajectory"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--storm", o.storm, "Storm id, e.g. AL012001");
    sub->add_option("--time", o.time, "Anchor time, ISO-8601 UTC");
    sub->add_option("--lead", o.lead, "Lead in hours")->check(CLI::IsMember({6, 12}));
    sub->add_option("--members", o.members, "Ensemble size")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
    sub->add_option("--split", o.split, "Storm split for bulk forecasts")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    sub->add_option("--records", o.records, "Verification records CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "tcsf-error code=invalid_argument status=1 msg=\"%s\"\n", escape(e.what()).c_str());
    return 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (o.config_path.empty()) {
    if (const char* env = std::getenv("TCSF_CONFIG")) o.config_path = env;
  }
  tcsf_config* config = nullptr;
  tcsf_status s = o.config_path.empty() ? tcsf_config_new(&config) : tcsf_config_load(o.config_path.c_str(), &config);
  if (s != TCSF_OK) return report(s);
  if (!o.set_json.empty() && (s = tcsf_config_merge_json(config, o.set_json.c_str())) != TCSF_OK) {
    tcsf_config_free(config);
    return report(s);
  }
  s = tcsf_config_set_paths(config, o.data_dir.empty() ? nullptr : o.data_dir.c_str(),
                            o.output_dir.empty() ? nullptr : o.output_dir.c_str());
  if (s == TCSF_OK) s = tcsf_config_validate(config);
  if (s != TCSF_OK) {
    tcsf_config_free(config);
    return report(s);
  }
  if (o.print_config) {
    char* text = nullptr;
    if (tcsf_config_dump(config, &text) == TCSF_OK) {
      std::printf("%s\n", text);
      tcsf_string_free(text);
    }
  }

  tcsf_command_args args;
  tcsf_command_args_init(&args);
  if (!o.storm.empty()) args.storm = o.storm.c_str();
  if (!o.time.empty()) args.time = o.time.c_str();
  args.lead_h = o.lead;
  args.members = o.members;
  if (o.seed) {
    args.has_seed = 1;
    args.seed = *o.seed;
  }
  if (!o.split.empty()) args.split = o.split.c_str();
  if (!o.records.empty()) args.records = o.records.c_str();

  tcsf_result* result = nullptr;
  s = tcsf_run_command(config, command.c_str(), &args, &result);
  tcsf_config_free(config);
  if (s != TCSF_OK) return report(s);
  std::printf("%s: %s\n", command.c_str(), tcsf_result_summary(result));
  for (size_t i = 0; i < tcsf_result_output_count(result); ++i) std::printf("  %s\n", tcsf_result_output(result, i));
  tcsf_result_free(result);
  return 0;
}
