#include "aoa/time_utils.hpp"

#include <cstdio>
#include <ctime>

namespace aoa {

std::string to_iso8601_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[72];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::string utc_now_iso8601() { return to_iso8601_utc(std::chrono::system_clock::now()); }

Clock fixed_clock(std::chrono::system_clock::time_point tp) {
  return [tp] { return tp; };
}

}  // namespace aoa
