// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/log.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace ifsem {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("IFSEM_LOG");
        if (env == nullptr) return LogLevel::kError;
        if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
        if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
        return LogLevel::kError;
    }();
    return level;
}

namespace {
void emit(LogLevel at, const char* tag, const std::string& msg) {
    if (log_level() >= at) std::cerr << "[ifsem " << tag << "] " << msg << std::endl;
}
}  // namespace

void log_error(const std::string& msg) { emit(LogLevel::kError, "error", msg); }
void log_info(const std::string& msg) { emit(LogLevel::kInfo, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::kDebug, "debug", msg); }

}  // namespace ifsem
