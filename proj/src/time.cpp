#include "windnbm/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <iostream>

#include "windnbm/errors.hpp"

namespace windnbm {

void warn(const std::string& message) { std::clog << "warning: " << message << '\n'; }

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len)
{
    int value = 0;
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("malformed timestamp '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

Timestamp parse_rfc3339(std::string_view text)
{
    // 2012-01-01T00:10:00Z
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':' || text[19] != 'Z') {
        throw DataError("malformed timestamp '" + std::string(text) + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    }
    using namespace std::chrono;
    const int y = parse_field(text, 0, 4);
    const int mo = parse_field(text, 5, 2);
    const int d = parse_field(text, 8, 2);
    const int h = parse_field(text, 11, 2);
    const int mi = parse_field(text, 14, 2);
    const int s = parse_field(text, 17, 2);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw DataError("invalid calendar time '" + std::string(text) + "'");
    }
    const auto day_count = sys_days{ymd}.time_since_epoch().count();
    return {static_cast<std::int64_t>(day_count) * kDay + h * kHour + mi * kMinute + s};
}

std::string format_rfc3339(Timestamp t)
{
    using namespace std::chrono;
    std::int64_t day_index = t.seconds / kDay;
    std::int64_t rem = t.seconds % kDay;
    if (rem < 0) {
        rem += kDay;
        --day_index;
    }
    const year_month_day ymd{sys_days{std::chrono::days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / kHour), static_cast<int>(rem % kHour / kMinute),
                  static_cast<int>(rem % kMinute));
    return buf;
}

Interval parse_interval(std::string_view text)
{
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        throw DataError("interval '" + std::string(text) + "' must be START/END");
    }
    Interval iv{parse_rfc3339(text.substr(0, slash)), parse_rfc3339(text.substr(slash + 1))};
    if (iv.end < iv.start) {
        throw DataError("interval '" + std::string(text) + "' ends before it starts");
    }
    return iv;
}

std::string format_interval(const Interval& iv)
{
    return format_rfc3339(iv.start) + "/" + format_rfc3339(iv.end);
}

double fractional_day_of_year(Timestamp t)
{
    using namespace std::chrono;
    const auto dp = floor<std::chrono::days>(sys_seconds{seconds{t.seconds}});
    const year_month_day ymd{dp};
    const sys_days jan1{ymd.year() / January / 1};
    return static_cast<double>(t.seconds - jan1.time_since_epoch().count() * kDay) / kDay;
}

double fractional_hour_of_day(Timestamp t)
{
    std::int64_t rem = t.seconds % kDay;
    if (rem < 0) rem += kDay;
    return static_cast<double>(rem) / kHour;
}

} // namespace windnbm
