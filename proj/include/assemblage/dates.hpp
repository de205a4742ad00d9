#pragma once

#include <compare>
#include <string>
#include <vector>

namespace assemblage {

/// Calendar month, the only time resolution the toolkit knows about.
/// Canonical text form is YYYY-MM; parsing also accepts YYYY-MM-DD
/// (the day is dropped).
struct MonthDate {
    int year = 1900;
    int month = 1;  // 1..12

    static MonthDate parse(const std::string& text);
    static MonthDate from_index(int idx) { return MonthDate{idx / 12, idx % 12 + 1}; }

    /// Months since year 0, so subtraction gives month distances.
    int index() const { return year * 12 + (month - 1); }

    MonthDate plus(int months) const { return from_index(index() + months); }
    std::string str() const;

    friend auto operator<=>(const MonthDate& a, const MonthDate& b) {
        return a.index() <=> b.index();
    }
    friend bool operator==(const MonthDate& a, const MonthDate& b) {
        return a.index() == b.index();
    }
};

inline int months_between(const MonthDate& from, const MonthDate& to) {
    return to.index() - from.index();
}

/// Inclusive run of consecutive months.
std::vector<MonthDate> month_range(const MonthDate& first, const MonthDate& last);

/// Parse "YYYY-MM:YYYY-MM" into an inclusive month interval.
std::pair<MonthDate, MonthDate> parse_month_interval(const std::string& text);

}  // namespace assemblage
