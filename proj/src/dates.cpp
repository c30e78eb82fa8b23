#include "untrue/dates.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <ctime>

#include "untrue/text.hpp"

namespace untrue {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return true;
}

int month_from_name(std::string_view name) {
    static constexpr std::array<std::string_view, 12> kMonths = {
        "january", "february", "march",     "april",   "may",      "june",
        "july",    "august",   "september", "october", "november", "december"};
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (!lower.empty() && lower.back() == '.') lower.pop_back();
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
        if (lower == kMonths[i]) return static_cast<int>(i) + 1;
        if (lower.size() >= 3 && kMonths[i].substr(0, lower.size()) == lower && lower.size() <= 4) {
            return static_cast<int>(i) + 1;
        }
    }
    return 0;
}

std::optional<CalendarDate> parse_iso_date(std::string_view s) {
    int y, m, d;
    if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, m) || s[7] != '-' ||
        !read_int(s, 8, 2, d)) {
        return std::nullopt;
    }
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
    if (!is_valid_date(y, m, d)) return std::nullopt;
    return CalendarDate{y, m, d};
}

std::optional<CalendarDate> parse_month_day_year(std::string_view s) {
    auto space = s.find(' ');
    if (space == std::string_view::npos) return std::nullopt;
    int month = month_from_name(s.substr(0, space));
    if (month == 0) return std::nullopt;
    auto rest = text::trim(s.substr(space + 1));
    auto comma = rest.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto day_text = text::trim(rest.substr(0, comma));
    auto year_text = text::trim(rest.substr(comma + 1));
    int day = 0;
    int year = 0;
    if (day_text.empty() || day_text.size() > 2 || !read_int(day_text, 0, day_text.size(), day)) return std::nullopt;
    if (year_text.size() != 4 || !read_int(year_text, 0, 4, year)) return std::nullopt;
    if (!is_valid_date(year, month, day)) return std::nullopt;
    return CalendarDate{year, month, day};
}

}  // namespace

std::string CalendarDate::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

bool is_valid_date(int year, int month, int day) {
    if (year < 1 || year > 9999 || month < 1 || month > 12 || day < 1) return false;
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    int limit = kDays[static_cast<std::size_t>(month - 1)] + ((month == 2 && leap) ? 1 : 0);
    return day <= limit;
}

std::optional<CalendarDate> parse_date(std::string_view text) {
    auto s = text::trim(text);
    if (s.empty()) return std::nullopt;
    if (std::isdigit(static_cast<unsigned char>(s.front()))) return parse_iso_date(s);
    return parse_month_day_year(s);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    auto s = text::trim(text);
    auto date = parse_iso_date(s);
    if (!date || s.size() < 20 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
    int hh, mm, ss;
    if (!read_int(s, 11, 2, hh) || s[13] != ':' || !read_int(s, 14, 2, mm) || s[16] != ':' ||
        !read_int(s, 17, 2, ss)) {
        return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    int offset_minutes = 0;
    if (pos < s.size() && s[pos] == 'Z' && pos + 1 == s.size()) {
        // UTC
    } else if (pos + 6 == s.size() && (s[pos] == '+' || s[pos] == '-') && s[pos + 3] == ':') {
        int oh, om;
        if (!read_int(s, pos + 1, 2, oh) || !read_int(s, pos + 4, 2, om)) return std::nullopt;
        offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    } else {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = date->year - 1900;
    tm.tm_mon = date->month - 1;
    tm.tm_mday = date->day;
    tm.tm_hour = hh;
    tm.tm_min = mm;
    tm.tm_sec = ss;
    std::time_t t = timegm(&tm) - offset_minutes * 60;
    return std::chrono::system_clock::from_time_t(t);
}

std::string format_timestamp(Timestamp ts) {
    std::time_t t = std::chrono::system_clock::to_time_t(ts);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace untrue
