#pragma once

// Small helpers for the CSV and key=value formats used throughout the project.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"

namespace bpdhar::text {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Fixed-precision output for human-facing files (SVG coordinates, summaries).
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    std::string s(buf, r.ptr);
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Line reader that tracks 1-based line numbers and strips a trailing '\r'.
class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    std::size_t line_no() const noexcept { return line_no_; }
    const std::string& source() const noexcept { return source_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

}  // namespace bpdhar::text

namespace bpdhar {

/// Calendar day, stored as days since 1970-01-01.
struct Date {
    std::int32_t days = 0;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

    static Date from_ymd(int y, unsigned m, unsigned d) {
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        if (!ymd.ok()) throw ArgumentError("invalid calendar date");
        return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
    }

    /// Parses `YYYY-MM-DD`.
    static std::optional<Date> parse(std::string_view s) {
        s = text::trim(s);
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        auto y = text::parse_number<int>(s.substr(0, 4));
        auto m = text::parse_number<unsigned>(s.substr(5, 2));
        auto d = text::parse_number<unsigned>(s.substr(8, 2));
        if (!y || !m || !d) return std::nullopt;
        const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
        if (!ymd.ok()) return std::nullopt;
        return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
    }

    std::string to_string() const {
        const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    /// Milliseconds since the epoch at local midnight (timestamps are treated as wall clock).
    constexpr std::int64_t midnight_ms() const noexcept { return std::int64_t{days} * 86'400'000; }

    static constexpr Date of_timestamp(std::int64_t ms) noexcept {
        std::int64_t d = ms / 86'400'000;
        if (ms % 86'400'000 < 0) --d;
        return Date{static_cast<std::int32_t>(d)};
    }
};

}  // namespace bpdhar
