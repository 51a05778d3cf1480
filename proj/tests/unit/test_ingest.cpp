#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "../support/fixture_expectations.hpp"
#include "tcsf/common.hpp"
#include "tcsf/ingest.hpp"
#include "tcsf/rng.hpp"
#include "tcsf/stamp.hpp"

using namespace tcsf;
namespace fs = std::filesystem;

namespace {

std::ifstream fixture(const char* name) {
  std::ifstream in(fs::path(TCSF_FIXTURES) / name);
  REQUIRE(in.good());
  return in;
}

void check_point(const TrackPoint& p, const fixtures::ExpectedPoint& e) {
  CHECK(p.storm_id == e.storm_id);
  CHECK(p.time == e.time);
  CHECK(p.lat == e.lat);
  CHECK(p.lon == e.lon);
  CHECK(p.vmax == e.vmax);
  CHECK(p.status == e.status);
  CHECK(p.pressure == e.pressure);
}

TrackPoint pt(UtcTime t, double vmax, double lat = 10.0) {
  TrackPoint p;
  p.storm_id = "AL012001";
  p.time = t;
  p.lat = lat;
  p.lon = -40.0;
  p.vmax = vmax;
  return p;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tcsf_ingest_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("hurdat2 fixture parses to the hand transcription") {
  auto in = fixture("hurdat2_sample.txt");
  const auto r = parse_hurdat2(in);
  REQUIRE(r.storms.size() == fixtures::kHurdat2Storms);
  CHECK(r.storms[0].header.name == "DORIAN");
  CHECK(r.storms[0].header.declared_count == 4);
  std::vector<TrackPoint> all;
  for (const auto& s : r.storms) {
    for (const auto& p : s.points) {
      CHECK(p.source == TrackSource::best_track);
      all.push_back(p);
    }
  }
  const auto expected = fixtures::hurdat2_points();
  REQUIRE(all.size() == expected.size());
  for (std::size_t i = 0; i < all.size(); ++i) check_point(all[i], expected[i]);
  REQUIRE(r.warnings.size() == fixtures::kHurdat2Warnings);
  CHECK(r.warnings[0].field == "record_count");
}

TEST_CASE("hurdat2 edge cases") {
  std::istringstream empty("AL012001,               NONE,      0,\n");
  const auto r = parse_hurdat2(empty);
  REQUIRE(r.storms.size() == 1);
  CHECK(r.storms[0].points.empty());
  CHECK(r.warnings.empty());

  std::istringstream bad("AL052019,             DORIAN,      2,\n"
                         "20190901, 1200,  , HU, 26.5N,  76.5W, 160,  913,\n"
                         "20190901, 1800,  , HU, 26.6N,  77.0Q, 160,  927,\n");
  try {
    parse_hurdat2(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.field() == "longitude");
    CHECK(e.code() == ErrorCode::parse);
  }
}

TEST_CASE("hurdat2 writer round-trips through the parser") {
  auto in = fixture("hurdat2_sample.txt");
  const auto r = parse_hurdat2(in);
  std::ostringstream out;
  write_hurdat2(out, r.storms);
  std::istringstream back(out.str());
  const auto r2 = parse_hurdat2(back);
  REQUIRE(r2.storms.size() == r.storms.size());
  for (std::size_t s = 0; s < r.storms.size(); ++s) {
    REQUIRE(r2.storms[s].points.size() == r.storms[s].points.size());
    for (std::size_t i = 0; i < r.storms[s].points.size(); ++i) {
      CHECK(r2.storms[s].points[i].time == r.storms[s].points[i].time);
      CHECK(r2.storms[s].points[i].vmax == r.storms[s].points[i].vmax);
      CHECK(r2.storms[s].points[i].lat == doctest::Approx(r.storms[s].points[i].lat));
    }
  }
}

TEST_CASE("a-deck CARQ fixture parses to the hand transcription") {
  auto in = fixture("adeck_sample.dat");
  const auto r = parse_adeck_carq(in);
  const auto expected = fixtures::adeck_points();
  REQUIRE(r.points.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    check_point(r.points[i], expected[i]);
    CHECK(r.points[i].source == TrackSource::operational);
  }
  REQUIRE(r.errors.size() == fixtures::kAdeckErrors);
  CHECK(r.errors[0].field == "TAU");
  CHECK(r.errors[0].line == 7);
  CHECK(r.errors[1].field == "VMAX");
}

TEST_CASE("a-deck without CARQ rows is empty") {
  std::istringstream in("AL, 05, 2019090112, 03, OFCL,   0, 265N,  765W,  155,  914, HU,\n"
                        "AL, 05, 2019090118, 03, OFCL,  12, 266N,  770W,  150,  920, HU,\n");
  const auto r = parse_adeck_carq(in);
  CHECK(r.points.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("ships fixture parses to the hand transcription") {
  auto in = fixture("ships_sample.txt");
  const auto r = parse_ships_shear(in);
  const auto expected = fixtures::ships_records();
  REQUIRE(r.records.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(r.records[i].storm_id == expected[i].storm_id);
    CHECK(r.records[i].time == expected[i].time);
    CHECK(r.records[i].magnitude == doctest::Approx(expected[i].magnitude).epsilon(1e-12));
    CHECK(r.records[i].direction == expected[i].direction);
  }
  CHECK(r.warnings.size() == fixtures::kShipsWarnings);
  CHECK(r.errors.size() == fixtures::kShipsErrors);
}

TEST_CASE("ships magnitude scale comes from the config") {
  auto in = fixture("ships_sample.txt");
  ShipsConfig cfg;
  cfg.magnitude_scale = 1.0;
  const auto r = parse_ships_shear(in, cfg);
  REQUIRE(!r.records.empty());
  CHECK(r.records[0].magnitude == 150.0);
}

TEST_CASE("interpolation") {
  const UtcTime t0 = make_time(2001, 8, 1, 0);
  SUBCASE("linear vmax and latitude") {
    const auto out = interpolate_track({pt(t0, 50.0, 10.0), pt(t0 + Hours{6}, 62.0, 11.2)});
    REQUIRE(out.size() == 4);
    CHECK(*out[1].vmax == doctest::Approx(54.0));
    CHECK(*out[2].vmax == doctest::Approx(58.0));
    CHECK(out[1].lat == doctest::Approx(10.4));
    CHECK(out[1].source == TrackSource::interpolated);
    CHECK(out[0].vmax == 50.0);
    CHECK(out[3].vmax == 62.0);
    CHECK(out[3].source == TrackSource::best_track);
  }
  SUBCASE("exact on affine series") {
    std::vector<TrackPoint> pts;
    for (int h = 0; h <= 48; h += 6) pts.push_back(pt(t0 + Hours{h}, 20.0 + 0.37 * h));
    for (const auto& p : interpolate_track(pts)) {
      CHECK(std::fabs(*p.vmax - (20.0 + 0.37 * hours_between(t0, p.time))) < 1e-9);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(interpolate_track({pt(t0, 50.0)}), doctest::Contains("cannot interpolate"), Error);
    CHECK_THROWS_AS(interpolate_track({pt(t0 + Hours{6}, 50.0), pt(t0, 40.0)}), Error);
  }
}

TEST_CASE("lifetime filter") {
  const UtcTime t0 = make_time(2001, 8, 1, 0);
  const auto series = [&](std::vector<double> v) {
    std::vector<TrackPoint> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(pt(t0 + Hours{6 * static_cast<int>(i)}, v[i]));
    return out;
  };
  const auto kept = lifetime_filter(series({30, 35, 30, 40, 30}));
  REQUIRE(kept.size() == 3);
  CHECK(kept.front().time == t0 + Hours{6});
  CHECK(kept.back().time == t0 + Hours{18});
  CHECK(lifetime_filter(series({40, 50, 35})).size() == 3);
  CHECK(lifetime_filter(series({10, 20, 34})).empty());
  const auto twice = lifetime_filter(kept);
  REQUIRE(twice.size() == kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(twice[i].time == kept[i].time);
}

TEST_CASE("stamp store round-trips bitwise including NaN") {
  const fs::path dir = scratch("stamp");
  BrightnessStamp s;
  s.storm_id = "AL012001";
  s.time = make_time(2001, 8, 1, 6);
  s.pixel_km = 4.0;
  s.rows = s.cols = 501;
  s.center_row = s.center_col = 250;
  s.grid.resize(s.rows * s.cols);
  Rng rng(3);
  for (auto& v : s.grid) v = static_cast<float>(-90.0 + 110.0 * uniform_open(rng));
  s.grid[17] = std::numeric_limits<float>::quiet_NaN();
  s.grid[s.grid.size() - 1] = std::numeric_limits<float>::quiet_NaN();
  store_stamp(s, dir / "a");
  const auto back = load_stamp(dir / "a");
  CHECK(back.storm_id == s.storm_id);
  CHECK(back.time == s.time);
  CHECK(back.rows == s.rows);
  CHECK(back.center_col == s.center_col);
  REQUIRE(back.grid.size() == s.grid.size());
  CHECK(std::memcmp(back.grid.data(), s.grid.data(), s.grid.size() * sizeof(float)) == 0);
  CHECK(std::isnan(back.grid[17]));

  // Truncated payload.
  fs::resize_file(fs::path(dir / "a").concat(".bin"), 1000);
  CHECK_THROWS_WITH_AS(load_stamp(dir / "a"), doctest::Contains("size mismatch"), Error);
}

TEST_CASE("stamp with unknown units is rejected") {
  const fs::path dir = scratch("units");
  BrightnessStamp s;
  s.storm_id = "AL012001";
  s.time = make_time(2001, 8, 1, 6);
  s.rows = s.cols = 3;
  s.center_row = s.center_col = 1;
  s.grid.assign(9, 0.0f);
  store_stamp(s, dir / "b");
  const fs::path hdr = fs::path(dir / "b").concat(".hdr");
  std::ifstream in(hdr);
  std::stringstream ss;
  ss << in.rdbuf();
  in.close();
  std::string text = ss.str();
  text.replace(text.find("units degC"), 10, "units F");
  std::ofstream(hdr) << text;
  CHECK_THROWS_WITH_AS(load_stamp(dir / "b"), doctest::Contains("units"), Error);
}

TEST_CASE("track and shear CSV round trip") {
  auto in = fixture("hurdat2_sample.txt");
  std::vector<TrackPoint> pts;
  for (const auto& s : parse_hurdat2(in).storms) pts.insert(pts.end(), s.points.begin(), s.points.end());
  std::stringstream ss;
  write_track_csv(ss, pts);
  const auto back = read_track_csv(ss);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].time == pts[i].time);
    CHECK(back[i].vmax == pts[i].vmax);
    CHECK(back[i].lon == pts[i].lon);
  }
  auto sin = fixture("ships_sample.txt");
  const auto shear = parse_ships_shear(sin).records;
  std::stringstream s2;
  write_shear_csv(s2, shear);
  const auto sback = read_shear_csv(s2);
  REQUIRE(sback.size() == shear.size());
  CHECK(sback[1].direction == shear[1].direction);
}
