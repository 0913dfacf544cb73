#include "gridcast/timeutil.hpp"

#include "gridcast/core.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace gridcast {

namespace {

// Howard Hinnant's algorithm; exact over the full proleptic Gregorian range.
void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2 ? 1 : 0));
}

int parse_int_exact(std::string_view s, const char* what) {
    int value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw DataError(std::string("malformed ") + what + " in timestamp");
    return value;
}

} // namespace

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[static_cast<std::size_t>(m - 1)];
}

CivilTime civil_from_hours(std::int64_t hours) {
    std::int64_t days = hours / 24;
    std::int64_t h = hours % 24;
    if (h < 0) {
        h += 24;
        days -= 1;
    }
    CivilTime ct;
    civil_from_days(days, ct.year, ct.month, ct.day);
    ct.hour = static_cast<int>(h);
    // 1970-01-01 was a Thursday; +3 shifts so Monday maps to 0.
    std::int64_t w = (days + 3) % 7;
    if (w < 0) w += 7;
    ct.dow = static_cast<int>(w);
    return ct;
}

std::int64_t hours_from_civil(int y, int m, int d, int h) {
    return days_from_civil(y, m, d) * 24 + h;
}

std::int64_t parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw DataError("malformed date '" + std::string(s) + "', expected YYYY-MM-DD");
    const int y = parse_int_exact(s.substr(0, 4), "year");
    const int m = parse_int_exact(s.substr(5, 2), "month");
    const int d = parse_int_exact(s.substr(8, 2), "day");
    if (m < 1 || m > 12)
        throw DataError("month out of range in date '" + std::string(s) + "'");
    if (d < 1 || d > days_in_month(y, m))
        throw DataError("day out of range in date '" + std::string(s) + "'");
    return days_from_civil(y, m, d);
}

std::int64_t parse_hour_timestamp(std::string_view s) {
    std::string_view body = s;
    if (!body.empty() && body.back() == 'Z') body.remove_suffix(1);
    if (body.size() != 19 || body[10] != 'T' || body[13] != ':' || body[16] != ':')
        throw DataError("malformed timestamp '" + std::string(s) +
                        "', expected YYYY-MM-DDTHH:00:00");
    const std::int64_t days = parse_date(body.substr(0, 10));
    const int h = parse_int_exact(body.substr(11, 2), "hour");
    if (h < 0 || h > 23)
        throw DataError("hour out of range in timestamp '" + std::string(s) + "'");
    if (body.substr(14, 2) != "00" || body.substr(17, 2) != "00")
        throw DataError("timestamp '" + std::string(s) + "' is not on an hour boundary");
    return days * 24 + h;
}

std::string format_hour_timestamp(std::int64_t hours) {
    const CivilTime ct = civil_from_hours(hours);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", ct.year, ct.month,
                  ct.day, ct.hour);
    return buf;
}

std::string format_date(std::int64_t days) {
    int y = 0, m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

} // namespace gridcast
