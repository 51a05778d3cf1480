#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "tcsf/common.hpp"
#include "tcsf/ingest.hpp"
#include "../common/text_util.hpp"

namespace tcsf {

const char* status_name(StormStatus status) {
  switch (status) {
    case StormStatus::TD: return "TD";
    case StormStatus::TS: return "TS";
    case StormStatus::HU: return "HU";
    case StormStatus::EX: return "EX";
    case StormStatus::other: return "other";
  }
  return "other";
}

StormStatus parse_status(const std::string& code) {
  if (code == "TD") return StormStatus::TD;
  if (code == "TS") return StormStatus::TS;
  if (code == "HU") return StormStatus::HU;
  if (code == "EX") return StormStatus::EX;
  return StormStatus::other;
}

const char* source_name(TrackSource source) {
  switch (source) {
    case TrackSource::best_track: return "best_track";
    case TrackSource::operational: return "operational";
    case TrackSource::interpolated: return "interpolated";
  }
  return "best_track";
}

TrackSource parse_source(const std::string& name) {
  if (name == "best_track") return TrackSource::best_track;
  if (name == "operational") return TrackSource::operational;
  if (name == "interpolated") return TrackSource::interpolated;
  throw Error(ErrorCode::parse, "unknown track source '" + name + "'");
}

namespace {

bool looks_like_header(std::string_view first) {
  return first.size() == 8 && std::isalpha(static_cast<unsigned char>(first[0])) &&
         std::isalpha(static_cast<unsigned char>(first[1])) && text::all_digits(first.substr(2));
}

// "26.6N" -> 26.6, "77.0W" -> -77.0
double parse_coordinate(std::string_view field, char positive, char negative, double limit,
                        int line, const char* name) {
  if (field.size() < 2) throw ParseError(line, name, "empty coordinate");
  const char suffix = field.back();
  if (suffix != positive && suffix != negative) {
    throw ParseError(line, name, "bad hemisphere suffix in '" + std::string(field) + "'");
  }
  const auto value = text::to_double(field.substr(0, field.size() - 1));
  if (!value || *value < 0.0 || *value > limit) {
    throw ParseError(line, name, "bad coordinate '" + std::string(field) + "'");
  }
  return suffix == negative ? -*value : *value;
}

std::optional<double> optional_number(std::string_view field, int line, const char* name) {
  if (field.empty()) return std::nullopt;
  const auto v = text::to_double(field);
  if (!v) throw ParseError(line, name, "not a number: '" + std::string(field) + "'");
  if (*v <= -999.0) return std::nullopt;
  return v;
}

void close_storm(Hurdat2Result& result) {
  if (result.storms.empty()) return;
  const auto& storm = result.storms.back();
  if (static_cast<int>(storm.points.size()) != storm.header.declared_count) {
    result.warnings.push_back(
        {storm.header.line, "record_count",
         storm.header.storm_id + ": header declares " +
             std::to_string(storm.header.declared_count) + " records, found " +
             std::to_string(storm.points.size())});
  }
}

}  // namespace

Hurdat2Result parse_hurdat2(std::istream& in) {
  Hurdat2Result result;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto trimmed = text::trim(raw);
    if (trimmed.empty()) continue;
    const auto fields = text::split_commas(trimmed);
    if (looks_like_header(fields[0])) {
      close_storm(result);
      if (fields.size() < 3) throw ParseError(line, "header", "expected id, name, count");
      const auto count = text::to_long(fields[2]);
      if (!count || *count < 0) throw ParseError(line, "record_count", "bad record count");
      StormTrack storm;
      storm.header = {std::string(fields[0]), std::string(fields[1]), static_cast<int>(*count),
                      line};
      result.storms.push_back(std::move(storm));
      continue;
    }
    if (result.storms.empty()) throw ParseError(line, "header", "data line before any header");
    if (fields.size() < 7) throw ParseError(line, "record", "expected at least 7 fields");
    if (fields[0].size() != 8 || !text::all_digits(fields[0])) {
      throw ParseError(line, "date", "expected YYYYMMDD, got '" + std::string(fields[0]) + "'");
    }
    if (fields[1].size() != 4 || !text::all_digits(fields[1])) {
      throw ParseError(line, "time", "expected HHMM, got '" + std::string(fields[1]) + "'");
    }
    auto& storm = result.storms.back();
    TrackPoint p;
    p.storm_id = storm.header.storm_id;
    try {
      const auto d = fields[0];
      const auto hm = fields[1];
      p.time = make_time(std::stoi(std::string(d.substr(0, 4))), std::stoi(std::string(d.substr(4, 2))),
                         std::stoi(std::string(d.substr(6, 2))), std::stoi(std::string(hm.substr(0, 2))),
                         std::stoi(std::string(hm.substr(2, 2))));
    } catch (const Error&) {
      throw ParseError(line, "date", "invalid calendar date");
    }
    p.status = parse_status(std::string(fields[3]));
    p.lat = parse_coordinate(fields[4], 'N', 'S', 90.0, line, "latitude");
    p.lon = parse_coordinate(fields[5], 'E', 'W', 180.0, line, "longitude");
    p.vmax = optional_number(fields[6], line, "vmax");
    if (p.vmax && *p.vmax < 0.0) throw ParseError(line, "vmax", "negative wind");
    if (fields.size() > 7) p.pressure = optional_number(fields[7], line, "pressure");
    p.source = TrackSource::best_track;
    if (!storm.points.empty() && p.time <= storm.points.back().time) {
      throw ParseError(line, "time", "times must increase within a storm");
    }
    storm.points.push_back(std::move(p));
  }
  close_storm(result);
  return result;
}

void write_hurdat2(std::ostream& out, const std::vector<StormTrack>& storms) {
  char buf[160];
  for (const auto& storm : storms) {
    std::snprintf(buf, sizeof buf, "%s, %18s, %6d,\n", storm.header.storm_id.c_str(),
                  storm.header.name.c_str(), static_cast<int>(storm.points.size()));
    out << buf;
    for (const auto& p : storm.points) {
      const std::string stamp = format_compact(p.time);
      const std::string status = p.status == StormStatus::other ? "LO" : status_name(p.status);
      const auto minute = std::chrono::duration_cast<std::chrono::minutes>(p.time.time_since_epoch()).count() % 60;
      std::snprintf(buf, sizeof buf, "%s, %s%02d,  , %s, %4.1f%c, %5.1f%c, %4d, %4d,\n",
                    stamp.substr(0, 8).c_str(), stamp.substr(8, 2).c_str(), static_cast<int>(minute), status.c_str(),
                    std::fabs(p.lat), p.lat < 0 ? 'S' : 'N', std::fabs(p.lon),
                    p.lon < 0 ? 'W' : 'E', p.vmax ? static_cast<int>(std::lround(*p.vmax)) : -999,
                    p.pressure ? static_cast<int>(std::lround(*p.pressure)) : -999);
      out << buf;
    }
  }
}

}  // namespace tcsf
