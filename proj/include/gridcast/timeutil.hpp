#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gridcast {

// Calendar math on hours since 1970-01-01T00:00:00. Timestamps are treated as
// local civil time with no DST; every day has exactly 24 hours.

struct CivilTime {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31
    int hour = 0;  // 0..23
    int dow = 0;   // Monday=0 .. Sunday=6
};

// Days since epoch for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);

CivilTime civil_from_hours(std::int64_t hours);

std::int64_t hours_from_civil(int y, int m, int d, int h);

// Parses "YYYY-MM-DDTHH:00:00" with an optional trailing "Z". Minutes and
// seconds must be zero; anything else throws DataError.
std::int64_t parse_hour_timestamp(std::string_view s);

// Parses "YYYY-MM-DD"; throws DataError on malformed input.
std::int64_t parse_date(std::string_view s);

std::string format_hour_timestamp(std::int64_t hours);
std::string format_date(std::int64_t days);

bool is_leap_year(int y);
int days_in_month(int y, int m);

} // namespace gridcast
