#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace v2x {

inline constexpr const char* kToolVersion = "0.1.0";

// Simulation time in integer microseconds. Mobility ticks at 25 FPS land
// exactly on 40 ms multiples, so generation statistics carry no float drift.
using TimeUs = std::int64_t;

inline constexpr TimeUs kTickUs = 40'000;          // 25 FPS mobility tick
inline constexpr TimeUs kUsPerSecond = 1'000'000;

inline TimeUs seconds_to_us(double s) {
  return static_cast<TimeUs>(std::llround(s * 1e6));
}
inline double us_to_seconds(TimeUs t) { return static_cast<double>(t) * 1e-6; }

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace v2x
