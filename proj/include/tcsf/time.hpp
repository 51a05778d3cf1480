#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace tcsf {

using UtcTime = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

inline constexpr Hours kProfileStep{2};
inline constexpr Hours kSynopticStep{6};

UtcTime make_time(int year, int month, int day, int hour, int minute = 0);

// 2019-09-01T18:00:00Z
std::string format_iso(UtcTime t);
// 2019090118
std::string format_compact(UtcTime t);

// Accepts ISO (YYYY-MM-DDTHH[:MM[:SS]]Z?) or compact YYYYMMDDHH.
UtcTime parse_time(std::string_view text);

bool is_synoptic(UtcTime t);
double hours_between(UtcTime from, UtcTime to);

}  // namespace tcsf
