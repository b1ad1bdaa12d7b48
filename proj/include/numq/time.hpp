#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace numq {

/// UTC wall-clock instant, integer milliseconds since the Unix epoch.
using Instant = std::int64_t;
/// Duration in milliseconds.
using Millis = std::int64_t;

namespace detail {

// Howard Hinnant's civil-date algorithms.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

/// Parses an RFC 3339 timestamp ("2024-05-01T12:30:00Z", optional fractional
/// seconds, optional numeric offset) into UTC milliseconds. Sub-millisecond
/// digits are truncated.
inline std::optional<Instant> parse_rfc3339(std::string_view s) {
    using namespace detail;
    int year, month, day, hour, minute, second;
    if (s.size() < 20) return std::nullopt;
    if (!parse_fixed_uint(s, 0, 4, year) || s[4] != '-' || !parse_fixed_uint(s, 5, 2, month) ||
        s[7] != '-' || !parse_fixed_uint(s, 8, 2, day))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!parse_fixed_uint(s, 11, 2, hour) || s[13] != ':' || !parse_fixed_uint(s, 14, 2, minute) ||
        s[16] != ':' || !parse_fixed_uint(s, 17, 2, second))
        return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        return std::nullopt;

    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        std::int64_t frac = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            if (digits < 3) frac = frac * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        while (digits < 3 && digits > 0) {
            frac *= 10;
            ++digits;
        }
        millis = frac;
    }

    std::int64_t offset_minutes = 0;
    if (pos >= s.size()) return std::nullopt;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const bool negative = s[pos] == '-';
        int oh, om;
        if (!parse_fixed_uint(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
            !parse_fixed_uint(s, pos + 4, 2, om))
            return std::nullopt;
        offset_minutes = oh * 60 + om;
        if (negative) offset_minutes = -offset_minutes;
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    std::int64_t total_seconds =
        days * 86400 + hour * 3600 + minute * 60 + second - offset_minutes * 60;
    return total_seconds * 1000 + millis;
}

/// Formats UTC milliseconds as RFC 3339 with millisecond precision.
inline std::string format_rfc3339(Instant ms) {
    using namespace detail;
    const std::int64_t days = floor_div(ms, 86400000);
    std::int64_t rem = ms - days * 86400000;
    std::int64_t y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    const int hour = static_cast<int>(rem / 3600000);
    rem %= 3600000;
    const int minute = static_cast<int>(rem / 60000);
    rem %= 60000;
    const int second = static_cast<int>(rem / 1000);
    const int milli = static_cast<int>(rem % 1000);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                  static_cast<long long>(y), mo, d, hour, minute, second, milli);
    return buf;
}

/// Accepts either integer epoch milliseconds or an RFC 3339 string.
inline std::optional<Instant> parse_instant(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool all_int = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) continue;
        if (c == '-' && i == 0) continue;
        all_int = false;
        break;
    }
    if (all_int) {
        Instant v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
        return v;
    }
    return parse_rfc3339(s);
}

}  // namespace numq
