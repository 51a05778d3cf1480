#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "tcsf/common.hpp"
#include "tcsf/ingest.hpp"
#include "../common/text_util.hpp"

namespace tcsf {

namespace {

// ATCF coordinates are tenths of a degree with a hemisphere suffix: "266N".
std::optional<double> atcf_coordinate(std::string_view field, char positive, char negative) {
  if (field.size() < 2) return std::nullopt;
  const char suffix = field.back();
  if (suffix != positive && suffix != negative) return std::nullopt;
  const auto tenths = text::to_long(field.substr(0, field.size() - 1));
  if (!tenths || *tenths < 0) return std::nullopt;
  const double v = static_cast<double>(*tenths) / 10.0;
  return suffix == negative ? -v : v;
}

}  // namespace

AdeckResult parse_adeck_carq(std::istream& in) {
  AdeckResult result;
  std::map<std::pair<std::string, UtcTime>, TrackPoint> rows;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (text::trim(raw).empty()) continue;
    const auto f = text::split_commas(raw);
    if (f.size() < 5) {
      result.errors.push_back({line, "record", "too few fields"});
      continue;
    }
    if (f[4] != "CARQ") continue;
    if (f.size() < 9) {
      result.errors.push_back({line, "record", "CARQ row with fewer than 9 fields"});
      continue;
    }
    const auto tau = text::to_long(f[5]);
    if (!tau) {
      result.errors.push_back({line, "TAU", "non-integer TAU '" + std::string(f[5]) + "'"});
      continue;
    }
    if (*tau != 0) continue;
    const auto vmax = text::to_long(f[8]);
    if (!vmax) {
      result.errors.push_back({line, "VMAX", "non-integer VMAX '" + std::string(f[8]) + "'"});
      continue;
    }
    if (f[2].size() != 10 || !text::all_digits(f[2])) {
      result.errors.push_back({line, "YYYYMMDDHH", "bad date-time '" + std::string(f[2]) + "'"});
      continue;
    }
    const auto lat = atcf_coordinate(f[6], 'N', 'S');
    const auto lon = atcf_coordinate(f[7], 'E', 'W');
    if (!lat || std::fabs(*lat) > 90.0) {
      result.errors.push_back({line, "LatN/S", "bad latitude '" + std::string(f[6]) + "'"});
      continue;
    }
    if (!lon || std::fabs(*lon) > 180.0) {
      result.errors.push_back({line, "LonE/W", "bad longitude '" + std::string(f[7]) + "'"});
      continue;
    }
    TrackPoint p;
    try {
      p.time = parse_time(f[2]);
    } catch (const Error&) {
      result.errors.push_back({line, "YYYYMMDDHH", "invalid date-time"});
      continue;
    }
    p.storm_id = std::string(f[0]) + std::string(f[1]) + std::string(f[2].substr(0, 4));
    p.lat = *lat;
    p.lon = *lon;
    if (*vmax >= 0) p.vmax = static_cast<double>(*vmax);
    if (f.size() > 9) {
      if (const auto mslp = text::to_long(f[9]); mslp && *mslp > 0) p.pressure = static_cast<double>(*mslp);
    }
    if (f.size() > 10) p.status = parse_status(std::string(f[10]));
    p.source = TrackSource::operational;
    rows[{p.storm_id, p.time}] = std::move(p);  // last occurrence wins
  }
  result.points.reserve(rows.size());
  for (auto& [key, p] : rows) result.points.push_back(std::move(p));
  return result;
}

void write_adeck_carq(std::ostream& out, const std::vector<TrackPoint>& points) {
  char buf[160];
  for (const auto& p : points) {
    const std::string basin = p.storm_id.substr(0, 2);
    const std::string number = p.storm_id.substr(2, 2);
    const std::string status = p.status == StormStatus::other ? "XX" : status_name(p.status);
    std::snprintf(buf, sizeof buf, "%s, %s, %s, 03, CARQ,   0, %3ld%c, %4ld%c, %4d, %4d, %s,\n",
                  basin.c_str(), number.c_str(), format_compact(p.time).c_str(),
                  std::lround(std::fabs(p.lat) * 10.0), p.lat < 0 ? 'S' : 'N',
                  std::lround(std::fabs(p.lon) * 10.0), p.lon < 0 ? 'W' : 'E',
                  p.vmax ? static_cast<int>(std::lround(*p.vmax)) : -99,
                  p.pressure ? static_cast<int>(std::lround(*p.pressure)) : 0, status.c_str());
    out << buf;
  }
}

}  // namespace tcsf
