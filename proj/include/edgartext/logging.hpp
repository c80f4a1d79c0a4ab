#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace edgartext {

enum class LogLevel { kDebug, kInfo, kWarn, kError };

/// Structured logger: one JSON object per line on stderr, so pipeline runs can
/// be grepped and post-processed without guessing at a text format.  Progress
/// output never goes to stdout, which belongs to the data a command emits.
class Logger {
public:
    static Logger& instance();

    void set_min_level(LogLevel level) { min_level_ = level; }
    LogLevel min_level() const { return min_level_; }

    void log(LogLevel level, std::string_view event, nlohmann::ordered_json fields = {});

    void debug(std::string_view event, nlohmann::ordered_json fields = {}) {
        log(LogLevel::kDebug, event, std::move(fields));
    }
    void info(std::string_view event, nlohmann::ordered_json fields = {}) {
        log(LogLevel::kInfo, event, std::move(fields));
    }
    void warn(std::string_view event, nlohmann::ordered_json fields = {}) {
        log(LogLevel::kWarn, event, std::move(fields));
    }
    void error(std::string_view event, nlohmann::ordered_json fields = {}) {
        log(LogLevel::kError, event, std::move(fields));
    }

private:
    LogLevel min_level_ = LogLevel::kInfo;
};

const char* log_level_name(LogLevel level);

}  // namespace edgartext
