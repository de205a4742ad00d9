#include "assemblage/dates.hpp"

#include <cctype>
#include <cstdio>

#include "assemblage/errors.hpp"

namespace assemblage {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

MonthDate MonthDate::parse(const std::string& text) {
    // YYYY-MM or YYYY-MM-DD
    if (text.size() < 7 || text[4] != '-')
        throw ConfigError("cannot parse month '" + text + "' (expected YYYY-MM or YYYY-MM-DD)");
    const std::string ys = text.substr(0, 4);
    const std::string ms = text.substr(5, 2);
    if (!all_digits(ys) || !all_digits(ms))
        throw ConfigError("cannot parse month '" + text + "'");
    if (text.size() > 7) {
        if (text.size() != 10 || text[7] != '-' || !all_digits(text.substr(8, 2)))
            throw ConfigError("cannot parse month '" + text + "'");
    }
    MonthDate d{std::stoi(ys), std::stoi(ms)};
    if (d.month < 1 || d.month > 12)
        throw ConfigError("month out of range in '" + text + "'");
    return d;
}

std::string MonthDate::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::vector<MonthDate> month_range(const MonthDate& first, const MonthDate& last) {
    std::vector<MonthDate> out;
    if (last < first) return out;
    out.reserve(static_cast<size_t>(months_between(first, last)) + 1);
    for (int i = first.index(); i <= last.index(); ++i) out.push_back(MonthDate::from_index(i));
    return out;
}

std::pair<MonthDate, MonthDate> parse_month_interval(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("cannot parse month interval '" + text + "' (expected YYYY-MM:YYYY-MM)");
    MonthDate a = MonthDate::parse(text.substr(0, colon));
    MonthDate b = MonthDate::parse(text.substr(colon + 1));
    if (b < a) throw ConfigError("month interval '" + text + "' ends before it starts");
    return {a, b};
}

}  // namespace assemblage
