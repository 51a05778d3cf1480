#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcsf/time.hpp"

namespace tcsf {

enum class StormStatus { TD, TS, HU, EX, other };
enum class TrackSource { best_track, operational, interpolated };

const char* status_name(StormStatus status);
StormStatus parse_status(const std::string& code);
const char* source_name(TrackSource source);
TrackSource parse_source(const std::string& name);

// Timestamped position and intensity. Longitudes are signed east-positive.
struct TrackPoint {
  std::string storm_id;
  UtcTime time{};
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> vmax;  // kt
  StormStatus status = StormStatus::other;
  TrackSource source = TrackSource::best_track;
  std::optional<double> pressure;  // hPa
};

struct ShearRecord {
  std::string storm_id;
  UtcTime time{};
  double magnitude = 0.0;            // kt
  std::optional<double> direction;   // degrees, heading toward, [0, 360)
};

struct ParseIssue {
  int line = 0;
  std::string field;
  std::string message;
};

// ---- HURDAT2 ---------------------------------------------------------------

struct StormHeader {
  std::string storm_id;
  std::string name;
  int declared_count = 0;
  int line = 0;
};

struct StormTrack {
  StormHeader header;
  std::vector<TrackPoint> points;
};

struct Hurdat2Result {
  std::vector<StormTrack> storms;
  std::vector<ParseIssue> warnings;
};

// Throws ParseError on the first malformed line.
Hurdat2Result parse_hurdat2(std::istream& in);
void write_hurdat2(std::ostream& out, const std::vector<StormTrack>& storms);

// ---- ATCF A-deck -------------------------------------------------------------

struct AdeckResult {
  std::vector<TrackPoint> points;  // CARQ, TAU 0, ordered by (storm, time)
  std::vector<ParseIssue> errors;  // per-line problems; those lines are skipped
};

AdeckResult parse_adeck_carq(std::istream& in);
void write_adeck_carq(std::ostream& out, const std::vector<TrackPoint>& points);

// ---- SHIPS developmental ---------------------------------------------------

// The SHIPS file grammar is not fixed by a single document; variable names,
// unit scale and the missing sentinel are configuration.
struct ShipsConfig {
  std::string magnitude_variable = "SHRD";  // 850-200 hPa shear magnitude, kt * 10
  double magnitude_scale = 0.1;
  std::string direction_variable = "SDDC";  // heading, degrees (name unverified)
  double direction_scale = 1.0;
  double missing_sentinel = 9999.0;
};

struct ShipsResult {
  std::vector<ShearRecord> records;
  std::vector<ParseIssue> warnings;
  std::vector<ParseIssue> errors;
};

ShipsResult parse_ships_shear(std::istream& in, const ShipsConfig& config = {});

struct ShipsCase {
  std::string storm_id;
  UtcTime time{};
  double vmax = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> magnitude_raw;  // in file units
  std::optional<double> direction_raw;
};
void write_ships(std::ostream& out, const std::vector<ShipsCase>& cases, const ShipsConfig& config = {});

// ---- Track preparation -------------------------------------------------------

// Linear interpolation of lat, lon and vmax onto every `step` multiple (UTC
// aligned) between the first and last time. Knots on the grid are copied
// exactly and keep their source; other points are tagged interpolated.
std::vector<TrackPoint> interpolate_track(const std::vector<TrackPoint>& points,
                                          Hours step = kProfileStep);

// Points between the first and last synoptic time with vmax >= 35 kt.
std::vector<TrackPoint> lifetime_filter(const std::vector<TrackPoint>& points,
                                        double threshold_kt = 35.0);

// Value of vmax at `t` from an already time-ordered series, if `t` is a knot.
std::optional<double> vmax_at(const std::vector<TrackPoint>& series, UtcTime t);

// Tabular track export: storm_id,time,lat,lon,vmax,status,source
void write_track_csv(std::ostream& out, const std::vector<TrackPoint>& points);
std::vector<TrackPoint> read_track_csv(std::istream& in);

void write_shear_csv(std::ostream& out, const std::vector<ShearRecord>& records);
std::vector<ShearRecord> read_shear_csv(std::istream& in);

}  // namespace tcsf
