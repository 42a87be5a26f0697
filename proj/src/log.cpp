#include "scriptdet/detail/log.hpp"

#include "scriptdet/detail/strings.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace scriptdet::detail {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SCRIPTDET_LOG");
    const std::string v = env != nullptr ? to_lower_ascii(env) : "";
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log(LogLevel level, std::string_view message) {
  if (level > log_level()) return;
  static std::mutex mu;
  static constexpr std::string_view names[] = {"error", "warn", "info", "debug"};
  const std::lock_guard lock(mu);
  std::cerr << "[scriptdet " << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace scriptdet::detail
