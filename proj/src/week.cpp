#include "attn/week.hpp"

#include <charconv>
#include <cstdio>

#include <fmt/format.h>

#include "attn/error.hpp"

namespace attn {

namespace {

using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

sys_days iso_week1_monday(int iso_year) {
    // Week 1 contains January 4th.
    const sys_days jan4 = sys_days{year{iso_year} / January / 4};
    const weekday wd{jan4};
    const int offset = (wd.c_encoding() + 6) % 7; // days since Monday
    return jan4 - days{offset};
}

} // namespace

Date parse_date(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), y) ||
        !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d))
        throw ContractError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw ContractError("invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date& d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

int iso_weeks_in_year(int y) {
    // A year has 53 ISO weeks iff Jan 1 is a Thursday, or a Wednesday in a leap year.
    const weekday jan1{sys_days{year{y} / January / 1}};
    const bool leap = year{y}.is_leap();
    return (jan1 == Thursday || (leap && jan1 == Wednesday)) ? 53 : 52;
}

IsoWeek::IsoWeek(int y, int w) : year_(y), week_(w) {
    if (w < 1 || w > iso_weeks_in_year(y))
        throw ContractError(fmt::format("invalid ISO week {}-W{:02d}", y, w));
}

IsoWeek IsoWeek::containing(const Date& d) {
    const sys_days day_point{d};
    const int offset = (weekday{day_point}.c_encoding() + 6) % 7;
    const sys_days thursday = day_point - days{offset} + days{3};
    const int iso_year = static_cast<int>(year_month_day{thursday}.year());
    const long w = (thursday - iso_week1_monday(iso_year)).count() / 7 + 1;
    return IsoWeek(iso_year, static_cast<int>(w));
}

IsoWeek IsoWeek::parse(std::string_view text) {
    int y = 0, w = 0;
    if (text.size() != 8 || text[4] != '-' || text[5] != 'W' || !parse_int(text.substr(0, 4), y) ||
        !parse_int(text.substr(6, 2), w))
        throw ContractError("invalid ISO week '" + std::string(text) + "', expected YYYY-Www");
    return IsoWeek(y, w);
}

std::chrono::sys_days IsoWeek::monday() const {
    return iso_week1_monday(year_) + weeks{week_ - 1};
}

IsoWeek IsoWeek::advanced(long n) const {
    return containing(Date{monday() + weeks{n}});
}

long IsoWeek::weeks_since(const IsoWeek& other) const {
    return (monday() - other.monday()).count() / 7;
}

std::string IsoWeek::label() const {
    return fmt::format("{:04d}-W{:02d}", year_, week_);
}

} // namespace attn
