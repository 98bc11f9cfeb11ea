// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Minimal stderr logging. Verbosity comes from HLOSIM_LOG_LEVEL
// (error, warn, info, debug; default warn).

#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace hlosim {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("HLOSIM_LOG_LEVEL");
    if (!env) return LogLevel::kWarn;
    const std::string_view v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log_message(LogLevel level, std::string_view msg) {
  if (level > log_level()) return;
  static std::mutex mu;
  static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[hlosim " << kTags[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void log_warn(std::string_view msg) { log_message(LogLevel::kWarn, msg); }
inline void log_info(std::string_view msg) { log_message(LogLevel::kInfo, msg); }
inline void log_debug(std::string_view msg) { log_message(LogLevel::kDebug, msg); }

}  // namespace hlosim
