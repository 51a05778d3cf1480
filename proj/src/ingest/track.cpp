#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "../common/text_util.hpp"
#include "tcsf/common.hpp"
#include "tcsf/ingest.hpp"

namespace tcsf {

using namespace std::chrono;

std::vector<TrackPoint> interpolate_track(const std::vector<TrackPoint>& points, Hours step) {
  if (points.size() < 2) throw Error(ErrorCode::invalid_argument, "cannot interpolate: need at least two points");
  if (step <= Hours{0}) throw Error(ErrorCode::invalid_argument, "interpolation step must be positive");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].time <= points[i - 1].time) {
      throw Error(ErrorCode::invalid_argument,
                  "cannot interpolate: times not strictly increasing at " + format_iso(points[i].time));
    }
  }
  const seconds step_s = step;
  const auto epoch_offset = points.front().time.time_since_epoch() % step_s;
  UtcTime t = points.front().time;
  if (epoch_offset != seconds{0}) t += step_s - epoch_offset;

  std::vector<TrackPoint> out;
  std::size_t k = 0;
  for (; t <= points.back().time; t += step_s) {
    while (k + 1 < points.size() && points[k + 1].time <= t) ++k;
    const TrackPoint& a = points[k];
    if (a.time == t) {
      out.push_back(a);
      continue;
    }
    const TrackPoint& b = points[k + 1];
    const double w = duration<double>(t - a.time).count() / duration<double>(b.time - a.time).count();
    TrackPoint p;
    p.storm_id = a.storm_id;
    p.time = t;
    p.lat = a.lat + w * (b.lat - a.lat);
    p.lon = a.lon + w * (b.lon - a.lon);
    if (a.vmax && b.vmax) p.vmax = *a.vmax + w * (*b.vmax - *a.vmax);
    p.status = a.status;
    p.source = TrackSource::interpolated;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<TrackPoint> lifetime_filter(const std::vector<TrackPoint>& points, double threshold_kt) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!is_synoptic(p.time) || !p.vmax || *p.vmax < threshold_kt) continue;
    if (!first) first = i;
    last = i;
  }
  if (!first) return {};
  return {points.begin() + static_cast<std::ptrdiff_t>(*first),
          points.begin() + static_cast<std::ptrdiff_t>(*last) + 1};
}

std::optional<double> vmax_at(const std::vector<TrackPoint>& series, UtcTime t) {
  const auto it = std::lower_bound(series.begin(), series.end(), t,
                                   [](const TrackPoint& p, UtcTime v) { return p.time < v; });
  if (it == series.end() || it->time != t) return std::nullopt;
  return it->vmax;
}

void write_track_csv(std::ostream& out, const std::vector<TrackPoint>& points) {
  out << "storm_id,time,lat,lon,vmax,status,source\n";
  for (const auto& p : points) {
    out << p.storm_id << ',' << format_iso(p.time) << ',' << text::format_double(p.lat) << ','
        << text::format_double(p.lon) << ',' << (p.vmax ? text::format_double(*p.vmax) : "") << ','
        << status_name(p.status) << ',' << source_name(p.source) << '\n';
  }
}

std::vector<TrackPoint> read_track_csv(std::istream& in) {
  std::vector<TrackPoint> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 || text::trim(line).empty()) continue;
    line += ',';  // keeps a trailing empty cell
    const auto f = text::split_commas(line);
    if (f.size() < 7) throw ParseError(n, "record", "expected 7 columns");
    TrackPoint p;
    p.storm_id = std::string(f[0]);
    p.time = parse_time(f[1]);
    const auto lat = text::to_double(f[2]);
    const auto lon = text::to_double(f[3]);
    if (!lat) throw ParseError(n, "lat", "not a number");
    if (!lon) throw ParseError(n, "lon", "not a number");
    p.lat = *lat;
    p.lon = *lon;
    if (!f[4].empty()) {
      const auto v = text::to_double(f[4]);
      if (!v) throw ParseError(n, "vmax", "not a number");
      p.vmax = *v;
    }
    p.status = parse_status(std::string(f[5]));
    p.source = parse_source(std::string(f[6]));
    out.push_back(std::move(p));
  }
  return out;
}

void write_shear_csv(std::ostream& out, const std::vector<ShearRecord>& records) {
  out << "storm_id,time,magnitude_kt,direction_deg\n";
  for (const auto& r : records) {
    out << r.storm_id << ',' << format_iso(r.time) << ',' << text::format_double(r.magnitude) << ','
        << (r.direction ? text::format_double(*r.direction) : "") << '\n';
  }
}

std::vector<ShearRecord> read_shear_csv(std::istream& in) {
  std::vector<ShearRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 || text::trim(line).empty()) continue;
    line += ',';  // keeps a trailing empty cell
    const auto f = text::split_commas(line);
    if (f.size() < 4) throw ParseError(n, "record", "expected 4 columns");
    ShearRecord r;
    r.storm_id = std::string(f[0]);
    r.time = parse_time(f[1]);
    const auto m = text::to_double(f[2]);
    if (!m) throw ParseError(n, "magnitude_kt", "not a number");
    r.magnitude = *m;
    if (!f[3].empty()) r.direction = text::to_double(f[3]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tcsf
