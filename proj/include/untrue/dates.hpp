#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace untrue {

struct CalendarDate {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const CalendarDate&) const = default;

    /// "YYYY-MM-DD"
    std::string str() const;
};

bool is_valid_date(int year, int month, int day);

/// Accepts ISO-8601 dates (optionally with a time part, which is ignored) and
/// English "Month D, YYYY" with full or abbreviated month names. Anything
/// else is rejected rather than guessed.
std::optional<CalendarDate> parse_date(std::string_view text);

using Timestamp = std::chrono::system_clock::time_point;

/// ISO-8601 date-time with 'Z' or a numeric offset; fractional seconds allowed.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ" (UTC, second precision).
std::string format_timestamp(Timestamp ts);

}  // namespace untrue
