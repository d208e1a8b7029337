#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace windnbm {

inline constexpr std::int64_t kMinute = 60;
inline constexpr std::int64_t kHour = 3600;
inline constexpr std::int64_t kDay = 86400;
inline constexpr std::int64_t kDefaultResolution = 600;

constexpr std::int64_t days(std::int64_t n) { return n * kDay; }

// Seconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t seconds = 0;

    auto operator<=>(const Timestamp&) const = default;

    friend constexpr Timestamp operator+(Timestamp t, std::int64_t s) { return {t.seconds + s}; }
    friend constexpr Timestamp operator-(Timestamp t, std::int64_t s) { return {t.seconds - s}; }
    friend constexpr std::int64_t operator-(Timestamp a, Timestamp b) { return a.seconds - b.seconds; }
};

// Half-open interval [start, end).
struct Interval {
    Timestamp start;
    Timestamp end;

    bool contains(Timestamp t) const { return start <= t && t < end; }
    bool empty() const { return end <= start; }
    bool overlaps(const Interval& o) const { return start < o.end && o.start < end; }
    std::int64_t length() const { return end - start; }

    bool operator==(const Interval&) const = default;
};

// Parses "YYYY-MM-DDTHH:MM:SSZ". Throws DataError on anything else.
Timestamp parse_rfc3339(std::string_view text);
std::string format_rfc3339(Timestamp t);

// "start/end" with both ends in RFC 3339.
Interval parse_interval(std::string_view text);
std::string format_interval(const Interval& iv);

// Day of year in [0, 366) and seconds into the day, for seasonal terms.
double fractional_day_of_year(Timestamp t);
double fractional_hour_of_day(Timestamp t);

} // namespace windnbm
