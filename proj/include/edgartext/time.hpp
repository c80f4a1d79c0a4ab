#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgartext {

/// Calendar date (no time zone; EDGAR dissemination dates are US business days).
struct Date {
    int year = 0;
    unsigned month = 0;  // 1..12
    unsigned day = 0;    // 1..31

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;
};

/// Wall-clock timestamp at second precision, no zone attached.  Acceptance
/// datetimes from the source archives are compared as plain tuples.
struct DateTime {
    Date date;
    unsigned hour = 0;
    unsigned minute = 0;
    unsigned second = 0;

    bool operator==(const DateTime&) const = default;
    auto operator<=>(const DateTime&) const = default;
};

std::optional<Date> parse_date_yyyymmdd(std::string_view s);

/// Parse "YYYY-MM-DD".
std::optional<Date> parse_date_iso(std::string_view s);

/// Parse "YYYYMMDDHHMMSS" (the ACCEPTANCE-DATETIME wire form).
std::optional<DateTime> parse_datetime_compact(std::string_view s);

/// Parse "YYYY-MM-DDTHH:MM:SS".
std::optional<DateTime> parse_datetime_iso(std::string_view s);

std::string format_date_iso(const Date& d);
std::string format_date_compact(const Date& d);

/// ISO-8601 without zone designator, e.g. "2014-01-01T12:00:00".
std::string format_datetime_iso(const DateTime& t);

bool is_valid_date(const Date& d);

/// 0 = Sunday .. 6 = Saturday.
int day_of_week(const Date& d);

inline bool is_weekend(const Date& d) {
    int w = day_of_week(d);
    return w == 0 || w == 6;
}

Date next_day(const Date& d);

/// All weekdays (Mon-Fri) in [first, last], inclusive.  US holidays are not
/// modeled; holiday archives are simply absent upstream and fetch treats a
/// missing day as empty.
std::vector<Date> business_days(const Date& first, const Date& last);

}  // namespace edgartext
