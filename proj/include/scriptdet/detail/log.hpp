#pragma once

#include <string_view>

namespace scriptdet::detail {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Level from SCRIPTDET_LOG (error|warn|info|debug); warn when unset.
LogLevel log_level();
void log(LogLevel level, std::string_view message);

}  // namespace scriptdet::detail
