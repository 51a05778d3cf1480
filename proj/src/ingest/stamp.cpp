#include "tcsf/stamp.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "../common/text_util.hpp"
#include "tcsf/common.hpp"

namespace tcsf {

namespace fs = std::filesystem;

double BrightnessStamp::coverage_radius_km() const {
  if (rows == 0 || cols == 0) return 0.0;
  const std::size_t reach = std::min({center_row, rows - 1 - center_row, center_col, cols - 1 - center_col});
  return static_cast<double>(reach) * pixel_km;
}

void validate_stamp(const BrightnessStamp& s) {
  if (!(s.pixel_km > 0.0)) throw Error(ErrorCode::domain, "stamp pixel_km must be positive");
  if (s.rows == 0 || s.cols == 0 || s.grid.size() != s.rows * s.cols) {
    throw Error(ErrorCode::shape, "stamp grid size does not match rows*cols");
  }
  if (s.center_row >= s.rows || s.center_col >= s.cols) {
    throw Error(ErrorCode::shape, "stamp centre index outside the grid");
  }
  for (float v : s.grid) {
    if (std::isfinite(v) && (v < kMinStampTemperature || v > kMaxStampTemperature)) {
      throw Error(ErrorCode::domain, "stamp temperature " + std::to_string(v) + " degC outside [-110, 60]");
    }
  }
}

namespace {

struct StampPaths {
  fs::path header, payload;
};

StampPaths stamp_paths(const fs::path& path) {
  fs::path base = path;
  if (base.extension() == ".hdr" || base.extension() == ".bin") base.replace_extension();
  fs::path header = base, payload = base;
  header += ".hdr";
  payload += ".bin";
  return {header, payload};
}

}  // namespace

void store_stamp(const BrightnessStamp& s, const fs::path& path) {
  validate_stamp(s);
  const auto paths = stamp_paths(path);
  if (paths.header.has_parent_path()) fs::create_directories(paths.header.parent_path());
  {
    std::ofstream hdr(paths.header);
    if (!hdr) throw Error(ErrorCode::io, "cannot write " + paths.header.string());
    hdr << "format tcsf-stamp 1\n"
        << "storm_id " << s.storm_id << '\n'
        << "time " << format_iso(s.time) << '\n'
        << "pixel_km " << text::format_double(s.pixel_km) << '\n'
        << "rows " << s.rows << '\n'
        << "cols " << s.cols << '\n'
        << "center_row " << s.center_row << '\n'
        << "center_col " << s.center_col << '\n'
        << "units degC\n";
    if (!hdr) throw Error(ErrorCode::io, "failed writing " + paths.header.string());
  }
  std::vector<char> bytes(s.grid.size() * 4);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(s.grid[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xFFu);
  }
  std::ofstream bin(paths.payload, std::ios::binary);
  if (!bin) throw Error(ErrorCode::io, "cannot write " + paths.payload.string());
  bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!bin) throw Error(ErrorCode::io, "failed writing " + paths.payload.string());
}

BrightnessStamp load_stamp(const fs::path& path) {
  const auto paths = stamp_paths(path);
  std::ifstream hdr(paths.header);
  if (!hdr) throw Error(ErrorCode::io, "cannot read " + paths.header.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(hdr, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto sp = t.find(' ');
    if (sp == std::string_view::npos) throw Error(ErrorCode::parse, "bad stamp header line '" + std::string(t) + "'");
    kv[std::string(t.substr(0, sp))] = std::string(text::trim(t.substr(sp + 1)));
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::parse, "stamp header missing '" + key + "'");
    return it->second;
  };
  const auto get_size = [&](const std::string& key) {
    const auto v = text::to_long(get(key));
    if (!v || *v < 0) throw Error(ErrorCode::parse, "stamp header '" + key + "' is not a count");
    return static_cast<std::size_t>(*v);
  };
  if (get("format") != "tcsf-stamp 1") throw Error(ErrorCode::parse, "unsupported stamp format '" + get("format") + "'");
  const std::string& units = get("units");
  double offset = 0.0;
  if (units == "K") {
    offset = -273.15;
  } else if (units != "degC") {
    throw Error(ErrorCode::parse, "unknown units tag '" + units + "'");
  }

  BrightnessStamp s;
  s.storm_id = get("storm_id");
  s.time = parse_time(get("time"));
  const auto px = text::to_double(get("pixel_km"));
  if (!px) throw Error(ErrorCode::parse, "stamp header 'pixel_km' is not a number");
  s.pixel_km = *px;
  s.rows = get_size("rows");
  s.cols = get_size("cols");
  s.center_row = get_size("center_row");
  s.center_col = get_size("center_col");

  std::ifstream bin(paths.payload, std::ios::binary);
  if (!bin) throw Error(ErrorCode::io, "cannot read " + paths.payload.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (bytes.size() != s.rows * s.cols * 4) {
    throw Error(ErrorCode::shape, "stamp size mismatch: header declares " + std::to_string(s.rows * s.cols) +
                                      " cells, payload holds " + std::to_string(bytes.size() / 4) +
                                      (bytes.size() % 4 ? " and a partial cell" : ""));
  }
  s.grid.resize(s.rows * s.cols);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    float v = std::bit_cast<float>(u);
    if (offset != 0.0 && std::isfinite(v)) v = static_cast<float>(v + offset);
    s.grid[i] = v;
  }
  validate_stamp(s);
  return s;
}

}  // namespace tcsf
