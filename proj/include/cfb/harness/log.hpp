#pragma once

// Diagnostic logging to stderr, gated by the CFB_LOG environment variable:
// unset/0 = silent, 1 = per-run progress, 2 = audit and bound details.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace cfb {

inline int log_level() {
  static const int level = [] {
    const char* raw = std::getenv("CFB_LOG");
    if (raw == nullptr || *raw == '\0') return 0;
    try {
      return std::stoi(raw);
    } catch (const std::exception&) {
      return 1;  // any non-numeric value enables basic logging
    }
  }();
  return level;
}

inline void log_line(int level, const std::string& message) {
  if (log_level() < level) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << message << '\n';
}

}  // namespace cfb
