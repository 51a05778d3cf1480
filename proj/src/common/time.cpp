#include "tcsf/time.hpp"

#include <cctype>
#include <cstdio>

#include "tcsf/common.hpp"

namespace tcsf {

using namespace std::chrono;

UtcTime make_time(int year, int month, int day, int hour, int minute) {
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour < 0 || hour > 23 || minute < 0 || minute > 59) {
    throw Error(ErrorCode::invalid_argument, "invalid calendar time");
  }
  return sys_days{ymd} + hours{hour} + minutes{minute};
}

namespace {

struct Fields {
  int year, month, day, hour, minute, second;
};

Fields split(UtcTime t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(hms.hours().count()),
          static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count())};
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw Error(ErrorCode::parse, "truncated time '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw Error(ErrorCode::parse, "bad time '" + std::string(s) + "'");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

std::string format_iso(UtcTime t) {
  const Fields f = split(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", f.year, f.month, f.day, f.hour,
                f.minute, f.second);
  return buf;
}

std::string format_compact(UtcTime t) {
  const Fields f = split(t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d%02d", f.year, f.month, f.day, f.hour);
  return buf;
}

UtcTime parse_time(std::string_view s) {
  if (s.size() == 10 && s.find('-') == std::string_view::npos) {
    return make_time(digits(s, 0, 4), digits(s, 4, 2), digits(s, 6, 2), digits(s, 8, 2));
  }
  if (s.size() >= 13 && s[4] == '-' && s[7] == '-' && (s[10] == 'T' || s[10] == ' ')) {
    int minute = 0;
    int second = 0;
    if (s.size() >= 16 && s[13] == ':') minute = digits(s, 14, 2);
    if (s.size() >= 19 && s[16] == ':') second = digits(s, 17, 2);
    return make_time(digits(s, 0, 4), digits(s, 5, 2), digits(s, 8, 2), digits(s, 11, 2), minute) +
           seconds{second};
  }
  throw Error(ErrorCode::parse, "unrecognized time '" + std::string(s) + "'");
}

bool is_synoptic(UtcTime t) {
  const auto since_midnight = t - floor<days>(t);
  return since_midnight % hours{6} == seconds{0};
}

double hours_between(UtcTime from, UtcTime to) {
  return duration<double, std::ratio<3600>>(to - from).count();
}

}  // namespace tcsf
