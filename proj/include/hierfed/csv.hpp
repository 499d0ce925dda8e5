#pragma once

#include <cstdio>
#include <string>

namespace hierfed {

// 17 significant digits: round-trips any double exactly, so reports from
// identical runs diff clean.
inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hierfed
