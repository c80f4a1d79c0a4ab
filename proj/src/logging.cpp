#include "edgartext/logging.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>

namespace edgartext {

namespace {
std::mutex g_log_mutex;

std::string utc_now_iso() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}
}  // namespace

Logger& Logger::instance() {
    static Logger logger;
    return logger;
}

const char* log_level_name(LogLevel level) {
    switch (level) {
        case LogLevel::kDebug: return "debug";
        case LogLevel::kInfo: return "info";
        case LogLevel::kWarn: return "warn";
        case LogLevel::kError: return "error";
    }
    return "unknown";
}

void Logger::log(LogLevel level, std::string_view event, nlohmann::ordered_json fields) {
    if (level < min_level_) return;
    nlohmann::ordered_json line;
    line["ts"] = utc_now_iso();
    line["level"] = log_level_name(level);
    line["event"] = std::string(event);
    if (fields.is_object()) {
        for (auto& [k, v] : fields.items()) line[k] = v;
    }
    std::string serialized = line.dump();
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::fputs(serialized.c_str(), stderr);
    std::fputc('\n', stderr);
}

}  // namespace edgartext
