#ifndef ATTN_WEEK_HPP
#define ATTN_WEEK_HPP

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace attn {

using Date = std::chrono::year_month_day;

// Parses YYYY-MM-DD. Throws ContractError on anything else.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

// ISO-8601 week: Monday start, labelled by the ISO year that owns its Thursday.
class IsoWeek {
public:
    IsoWeek() = default;
    IsoWeek(int year, int week);

    static IsoWeek containing(const Date& d);
    // Accepts "2014-W07".
    static IsoWeek parse(std::string_view text);

    int year() const noexcept { return year_; }
    int week() const noexcept { return week_; }

    std::chrono::sys_days monday() const;
    IsoWeek next() const { return advanced(1); }
    IsoWeek advanced(long weeks) const;
    // Signed number of weeks from `other` to this week.
    long weeks_since(const IsoWeek& other) const;

    std::string label() const;

    auto operator<=>(const IsoWeek&) const = default;

private:
    int year_ = 1970;
    int week_ = 1;
};

int iso_weeks_in_year(int year);

} // namespace attn

#endif
