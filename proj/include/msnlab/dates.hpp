#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "msnlab/errors.hpp"

namespace msnlab {

// 2016-01-14T00:00:00Z, first day of the collection period.
inline constexpr std::int64_t kCorpusStartTs = 1452729600;
inline constexpr int kSecondsPerDay = 86400;

inline int epoch_day(std::int64_t ts) {
  return static_cast<int>(ts / kSecondsPerDay);
}

inline constexpr int kCorpusStartDay = 16814;  // epoch_day(kCorpusStartTs)

// 0 = Sunday ... 6 = Saturday. 1970-01-01 was a Thursday.
inline int weekday_of(int day) { return (day % 7 + 7 + 4) % 7; }

inline bool is_weekend(int day) {
  const int w = weekday_of(day);
  return w == 0 || w == 6;
}

// Civil date from epoch day (Gregorian), see Hinnant's civil_from_days.
inline void civil_from_day(int day, int& y, int& m, int& d) {
  std::int64_t z = day + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

inline int day_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<int>(era * 146097 + static_cast<std::int64_t>(doe) -
                          719468);
}

inline std::string iso_date(int day) {
  int y, m, d;
  civil_from_day(day, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

// Parses "YYYY-MM-DD" into an epoch day.
inline int parse_iso_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31) {
    throw InputError("bad date: " + s);
  }
  return day_from_civil(y, m, d);
}

// Half-open day interval [first, last] expressed in epoch days.
struct DayWindow {
  int first = 0;
  int last = -1;  // inclusive; empty when last < first

  bool empty() const { return last < first; }
  bool contains(int day) const { return day >= first && day <= last; }
  int length() const { return empty() ? 0 : last - first + 1; }
};

}  // namespace msnlab
