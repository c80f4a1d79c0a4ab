#include "edgartext/time.hpp"

#include <cstdio>
#include <vector>

namespace edgartext {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    unsigned v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<Date> parse_date_yyyymmdd(std::string_view s) {
    if (s.size() != 8) return std::nullopt;
    unsigned y, m, d;
    if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(4, 2), m) ||
        !parse_uint(s.substr(6, 2), d))
        return std::nullopt;
    Date date{static_cast<int>(y), m, d};
    if (!is_valid_date(date)) return std::nullopt;
    return date;
}

std::optional<Date> parse_date_iso(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    unsigned y, m, d;
    if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), m) ||
        !parse_uint(s.substr(8, 2), d))
        return std::nullopt;
    Date date{static_cast<int>(y), m, d};
    if (!is_valid_date(date)) return std::nullopt;
    return date;
}

std::optional<DateTime> parse_datetime_compact(std::string_view s) {
    if (s.size() != 14) return std::nullopt;
    auto date = parse_date_yyyymmdd(s.substr(0, 8));
    if (!date) return std::nullopt;
    unsigned hh, mm, ss;
    if (!parse_uint(s.substr(8, 2), hh) || !parse_uint(s.substr(10, 2), mm) ||
        !parse_uint(s.substr(12, 2), ss))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    return DateTime{*date, hh, mm, ss};
}

std::optional<DateTime> parse_datetime_iso(std::string_view s) {
    if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') return std::nullopt;
    auto date = parse_date_iso(s.substr(0, 10));
    if (!date) return std::nullopt;
    unsigned hh, mm, ss;
    if (!parse_uint(s.substr(11, 2), hh) || !parse_uint(s.substr(14, 2), mm) ||
        !parse_uint(s.substr(17, 2), ss))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    return DateTime{*date, hh, mm, ss};
}

std::string format_date_iso(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

std::string format_date_compact(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d%02u%02u", d.year, d.month, d.day);
    return buf;
}

std::string format_datetime_iso(const DateTime& t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02u", t.date.year, t.date.month,
                  t.date.day, t.hour, t.minute, t.second);
    return buf;
}

bool is_valid_date(const Date& d) {
    if (d.year < 1900 || d.year > 2200) return false;
    if (d.month < 1 || d.month > 12) return false;
    std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                    std::chrono::day{d.day}};
    return ymd.ok();
}

int day_of_week(const Date& d) {
    std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                    std::chrono::day{d.day}};
    std::chrono::weekday wd{std::chrono::sys_days{ymd}};
    return static_cast<int>(wd.c_encoding());  // 0 = Sunday
}

Date next_day(const Date& d) {
    std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                    std::chrono::day{d.day}};
    std::chrono::sys_days sd{ymd};
    std::chrono::year_month_day next{sd + std::chrono::days{1}};
    return Date{static_cast<int>(next.year()), static_cast<unsigned>(next.month()),
                static_cast<unsigned>(next.day())};
}

std::vector<Date> business_days(const Date& first, const Date& last) {
    std::vector<Date> out;
    if (!is_valid_date(first) || !is_valid_date(last)) return out;
    for (Date d = first; d <= last; d = next_day(d)) {
        if (!is_weekend(d)) out.push_back(d);
    }
    return out;
}

}  // namespace edgartext
