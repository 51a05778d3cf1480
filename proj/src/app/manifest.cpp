#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tcsf/app.hpp"
#include "tcsf/common.hpp"

namespace tcsf {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version_string() { return "0.1.0"; }

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".tcsf.lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::state, "output directory " + dir.string() + " is locked by another run (" +
                                      path_.string() + ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

json describe(const fs::path& p) {
  json j{{"path", p.string()}};
  std::error_code ec;
  if (fs::is_regular_file(p, ec)) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    j["bytes"] = fs::file_size(p);
    j["fnv1a"] = fnv1a_hex(ss.str());
  } else if (fs::is_directory(p, ec)) {
    j["directory"] = true;
  } else {
    j["missing"] = true;
  }
  return j;
}

}  // namespace

fs::path write_manifest(const Manifest& m, const fs::path& output_dir) {
  json inputs = json::array(), outputs = json::array();
  for (const auto& p : m.inputs) inputs.push_back(describe(p));
  for (const auto& p : m.outputs) outputs.push_back(describe(p));
  const json j{{"command", m.command},  {"version", version_string()}, {"config_hash", m.config_hash},
               {"seed", m.seed},        {"arguments", m.arguments},  {"inputs", inputs},
               {"outputs", outputs}};
  const fs::path dir = output_dir / "manifests";
  fs::create_directories(dir);
  const fs::path path = dir / (m.command + ".json");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

}  // namespace tcsf
