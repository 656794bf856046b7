#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <string>
#include <string_view>

#include "revtrace/errors.hpp"

namespace revtrace {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

inline Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

// Fixed-width RFC 3339 in UTC with microseconds: 2019-11-03T10:15:30.000250Z
inline std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto secs = floor<seconds>(t);
  const auto micros = (t - secs).count();
  const std::time_t tt = secs.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(micros));
  return buf;
}

// Accepts the form produced by format_rfc3339, with 0-9 fraction digits and
// either 'Z' or a numeric offset.
inline Timestamp parse_rfc3339(std::string_view s) {
  auto fail = [&]() -> FormatError { return FormatError("bad RFC 3339 timestamp '" + std::string(s) + "'"); };
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    if (pos + len > s.size()) throw fail();
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc{} || p != s.data() + pos + len) throw fail();
    return v;
  };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') || s[13] != ':' ||
      s[16] != ':')
    throw fail();
  std::tm tm{};
  tm.tm_year = num(0, 4) - 1900;
  tm.tm_mon = num(5, 2) - 1;
  tm.tm_mday = num(8, 2);
  tm.tm_hour = num(11, 2);
  tm.tm_min = num(14, 2);
  tm.tm_sec = num(17, 2);
  std::size_t pos = 19;
  long long micros = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 6) micros = micros * 10 + (s[pos] - '0');
      ++digits, ++pos;
    }
    if (digits == 0) throw fail();
    for (int d = digits; d < 6; ++d) micros *= 10;
  }
  long offset_sec = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    if (pos + 6 > s.size() || s[pos + 3] != ':') throw fail();
    offset_sec = sign * (num(pos + 1, 2) * 3600L + num(pos + 4, 2) * 60L);
    pos += 6;
  } else {
    throw fail();
  }
  if (pos != s.size()) throw fail();
  const std::time_t tt = timegm(&tm);
  return Timestamp(std::chrono::microseconds((static_cast<long long>(tt) - offset_sec) * 1000000LL + micros));
}

}  // namespace revtrace
