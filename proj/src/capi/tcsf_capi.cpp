#include "tcsf/tcsf.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "tcsf/app.hpp"
#include "tcsf/common.hpp"
#include "tcsf/verify.hpp"

struct tcsf_config {
  tcsf::RunConfig config;
};

struct tcsf_result {
  std::string summary;
  std::vector<std::string> outputs;
};

struct tcsf_structsim {
  tcsf::StructSimModel model;
};

struct tcsf_nowcast {
  tcsf::NowcastModel model;
};

namespace {

thread_local std::string g_last_error;

tcsf_status fail(tcsf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
tcsf_status guarded(F&& f) {
  try {
    f();
    return TCSF_OK;
  } catch (const tcsf::Error& e) {
    return fail(static_cast<tcsf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TCSF_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TCSF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TCSF_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw tcsf::Error(tcsf::ErrorCode::invalid_argument, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tcsf::StructuralTrajectory to_trajectory(const double* data, int n_observed, int n_simulated, tcsf::UtcTime anchor) {
  tcsf::StructuralTrajectory t(n_observed, n_simulated, anchor);
  std::copy(data, data + t.data().size(), t.data().begin());
  return t;
}

const tcsf::UtcTime kAnchor = tcsf::make_time(2000, 1, 2, 0);

}  // namespace

extern "C" {

const char* tcsf_version(void) { return tcsf::version_string(); }
const char* tcsf_last_error(void) { return g_last_error.c_str(); }

const char* tcsf_status_name(tcsf_status status) {
  if (status == TCSF_OK) return "ok";
  if (status < TCSF_ERR_INVALID_ARGUMENT || status > TCSF_ERR_INTERNAL) return "unknown";
  return tcsf::error_code_name(static_cast<tcsf::ErrorCode>(status));
}

void tcsf_string_free(char* s) { std::free(s); }

tcsf_status tcsf_config_new(tcsf_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new tcsf_config{};
  });
}

tcsf_status tcsf_config_load(const char* path, tcsf_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new tcsf_config{tcsf::load_config(path)};
  });
}

tcsf_status tcsf_config_merge_json(tcsf_config* config, const char* json_text) {
  return guarded([&] {
    need(config, "config");
    need(json_text, "json_text");
    config->config = tcsf::parse_config(json_text, config->config);
  });
}

tcsf_status tcsf_config_set_paths(tcsf_config* config, const char* data_dir, const char* output_dir) {
  return guarded([&] {
    need(config, "config");
    if (data_dir) config->config.data_dir = data_dir;
    if (output_dir) config->config.output_dir = output_dir;
  });
}

tcsf_status tcsf_config_validate(const tcsf_config* config) {
  return guarded([&] {
    need(config, "config");
    config->config.validate();
  });
}

tcsf_status tcsf_config_dump(const tcsf_config* config, char** json_out) {
  return guarded([&] {
    need(config, "config");
    need(json_out, "json_out");
    *json_out = dup_string(tcsf::format_config(config->config));
  });
}

tcsf_status tcsf_config_hash(const tcsf_config* config, char* buffer, size_t size) {
  return guarded([&] {
    need(config, "config");
    need(buffer, "buffer");
    const std::string h = tcsf::config_hash(config->config);
    if (size < h.size() + 1) throw tcsf::Error(tcsf::ErrorCode::invalid_argument, "hash buffer needs 17 bytes");
    std::memcpy(buffer, h.c_str(), h.size() + 1);
  });
}

void tcsf_config_free(tcsf_config* config) { delete config; }

void tcsf_command_args_init(tcsf_command_args* args) {
  if (args) *args = tcsf_command_args{nullptr, nullptr, 0, 0, 0, 0, nullptr, nullptr};
}

tcsf_status tcsf_run_command(const tcsf_config* config, const char* command, const tcsf_command_args* args,
                             tcsf_result** out) {
  return guarded([&] {
    need(config, "config");
    need(command, "command");
    need(out, "out");
    tcsf::CommandArgs a;
    if (args) {
      if (args->storm) a.storm = args->storm;
      if (args->time) a.time = tcsf::parse_time(args->time);
      if (args->lead_h != 0) a.lead = args->lead_h;
      if (args->members != 0) a.members = args->members;
      if (args->has_seed) a.seed = args->seed;
      if (args->split) a.split = args->split;
      if (args->records) a.records = std::filesystem::path(args->records);
    }
    const tcsf::CommandResult r = tcsf::run_command(command, config->config, a);
    auto* res = new tcsf_result{r.summary, {}};
    for (const auto& p : r.outputs) res->outputs.push_back(p.string());
    *out = res;
  });
}

const char* tcsf_result_summary(const tcsf_result* result) { return result ? result->summary.c_str() : ""; }
size_t tcsf_result_output_count(const tcsf_result* result) { return result ? result->outputs.size() : 0; }
const char* tcsf_result_output(const tcsf_result* result, size_t index) {
  if (!result || index >= result->outputs.size()) return nullptr;
  return result->outputs[index].c_str();
}
void tcsf_result_free(tcsf_result* result) { delete result; }

tcsf_status tcsf_structsim_load(const char* checkpoint, tcsf_structsim** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new tcsf_structsim{tcsf::load_structsim(checkpoint)};
  });
}

void tcsf_structsim_free(tcsf_structsim* model) { delete model; }

tcsf_status tcsf_structsim_simulate(const tcsf_structsim* model, const double* observed, int steps, int members,
                                    uint64_t seed, double* out) {
  return guarded([&] {
    need(model, "model");
    need(observed, "observed");
    need(out, "out");
    if (members < 1) throw tcsf::Error(tcsf::ErrorCode::invalid_argument, "members must be at least 1");
    const auto obs = to_trajectory(observed, tcsf::kObservedRows, 0, kAnchor);
    const auto ens = tcsf::ensemble(model->model, obs, members, steps, seed);
    const std::size_t per_row = tcsf::kRadialBins * tcsf::kQuadrants;
    for (std::size_t m = 0; m < ens.size(); ++m) {
      const auto& d = ens[m].data();
      std::copy(d.begin() + tcsf::kObservedRows * per_row, d.end(), out + m * steps * per_row);
    }
  });
}

tcsf_status tcsf_structsim_nll(const tcsf_structsim* model, const double* window, int rows, double* out) {
  return guarded([&] {
    need(model, "model");
    need(window, "window");
    need(out, "out");
    if (rows < 1 || rows > model->model.arch.window_rows) {
      throw tcsf::Error(tcsf::ErrorCode::shape, "rows must be in 1.." + std::to_string(model->model.arch.window_rows));
    }
    *out = tcsf::nll_degc(model->model, {to_trajectory(window, rows, 0, kAnchor)});
  });
}

tcsf_status tcsf_nowcast_load(const char* checkpoint, tcsf_nowcast** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new tcsf_nowcast{tcsf::load_nowcast(checkpoint)};
  });
}

void tcsf_nowcast_free(tcsf_nowcast* model) { delete model; }

size_t tcsf_nowcast_persistence_size(const tcsf_nowcast* model) {
  return model ? static_cast<size_t>(model->model.features.persistence_size()) : 0;
}

tcsf_status tcsf_nowcast_predict(const tcsf_nowcast* model, const double* traj13, const double* persistence,
                                 size_t n_persistence, double* out_kt) {
  return guarded([&] {
    need(model, "model");
    need(traj13, "traj13");
    need(persistence, "persistence");
    need(out_kt, "out_kt");
    if (n_persistence != static_cast<size_t>(model->model.features.persistence_size())) {
      throw tcsf::Error(tcsf::ErrorCode::shape, "expected " + std::to_string(model->model.features.persistence_size()) +
                                                    " persistence entries");
    }
    tcsf::NowcastFeatures f;
    f.time = kAnchor;
    f.image = tcsf::nowcast_image(to_trajectory(traj13, tcsf::kObservedRows, 0, kAnchor));
    f.persistence.assign(persistence, persistence + n_persistence);
    *out_kt = tcsf::predict_now(model->model, f);
  });
}

tcsf_status tcsf_intensity_score(const double* predictions, const double* truths, size_t n, double* rmse, double* mae,
                                 double* bias) {
  return guarded([&] {
    need(predictions, "predictions");
    need(truths, "truths");
    const auto s = tcsf::intensity_score(std::vector<double>(predictions, predictions + n),
                                         std::vector<double>(truths, truths + n));
    if (rmse) *rmse = s.rmse;
    if (mae) *mae = s.mae;
    if (bias) *bias = s.bias;
  });
}

}  // extern "C"
