#pragma once

// Local-time calendar arithmetic. Timestamps are UTC seconds; the study
// area's clock is modeled as a fixed UTC offset (configured per run), which
// is sufficient for a one-month observation window. Days are numbered as
// local civil days since 1970-01-01.

#include <chrono>
#include <cstdint>
#include <set>
#include <string>

#include "mobility/error.hpp"

namespace mobility {

inline constexpr int64_t kSecondsPerDay = 86400;

/// Parses "YYYY-MM-DD" into a civil day number (days since 1970-01-01).
inline int32_t parse_date(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw InputError("bad date (expected YYYY-MM-DD): " + iso);
    int y = std::stoi(iso.substr(0, 4));
    unsigned m = static_cast<unsigned>(std::stoi(iso.substr(5, 2)));
    unsigned d = static_cast<unsigned>(std::stoi(iso.substr(8, 2)));
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw InputError("invalid calendar date: " + iso);
    return static_cast<int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

inline std::string format_date(int32_t day) {
    std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

enum class DayType { workday, holiday };

inline const char* to_string(DayType t) { return t == DayType::workday ? "workday" : "holiday"; }

/// Weekend rule (Saturday/Sunday) plus an explicit holiday-date set.
/// "holiday" as a day type means weekend-or-holiday throughout the pipeline.
struct HolidayCalendar {
    int tz_offset_min = 120;          // UTC+2 by default
    std::set<int32_t> holiday_days;   // local civil day numbers

    void add_holiday(const std::string& iso) { holiday_days.insert(parse_date(iso)); }

    int32_t local_day(int64_t ts_utc) const {
        int64_t local = ts_utc + int64_t{tz_offset_min} * 60;
        // floor division for pre-1970 safety
        int64_t d = local >= 0 ? local / kSecondsPerDay : (local - kSecondsPerDay + 1) / kSecondsPerDay;
        return static_cast<int32_t>(d);
    }

    int local_second_of_day(int64_t ts_utc) const {
        int64_t local = ts_utc + int64_t{tz_offset_min} * 60;
        int64_t s = local % kSecondsPerDay;
        if (s < 0) s += kSecondsPerDay;
        return static_cast<int>(s);
    }

    /// 0 = Monday ... 6 = Sunday. Day 0 (1970-01-01) was a Thursday.
    static int day_of_week(int32_t day) {
        int dow = static_cast<int>((day + 3) % 7);
        return dow < 0 ? dow + 7 : dow;
    }

    bool is_weekend(int32_t day) const { return day_of_week(day) >= 5; }

    DayType day_type(int32_t day) const {
        return (is_weekend(day) || holiday_days.count(day)) ? DayType::holiday : DayType::workday;
    }

    DayType day_type_of(int64_t ts_utc) const { return day_type(local_day(ts_utc)); }
};

} // namespace mobility
