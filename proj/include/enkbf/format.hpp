#pragma once

#include <charconv>
#include <string>

namespace enkbf {

// Shortest decimal string that round-trips to the same double.
inline std::string to_shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace enkbf
