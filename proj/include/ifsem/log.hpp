// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>

namespace ifsem {

// Diagnostic verbosity, controlled by the IFSEM_LOG environment variable
// (error, info, debug). Messages go to standard error.
enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace ifsem
