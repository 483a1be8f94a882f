#pragma once

#include <chrono>
#include <functional>
#include <string>

namespace aoa {

/// Injectable time source; results carry UTC ISO-8601 strings so runs diff cleanly.
using Clock = std::function<std::chrono::system_clock::time_point()>;

std::string to_iso8601_utc(std::chrono::system_clock::time_point tp);
std::string utc_now_iso8601();

inline Clock system_clock_now() {
  return [] { return std::chrono::system_clock::now(); };
}

/// A clock frozen at the given instant, for reproducible fixtures.
Clock fixed_clock(std::chrono::system_clock::time_point tp);

}  // namespace aoa
