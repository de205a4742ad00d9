#include "assemblage/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace assemblage::csv {

using Eigen::Index;

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

double parse_double(const std::string& cell, const std::string& path) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("cannot parse number '" + cell + "' in " + path);
    return value;
}

}  // namespace

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size())
                throw ConfigError("ragged row in " + path + " (expected " +
                                  std::to_string(table.header.size()) + " cells, got " +
                                  std::to_string(cells.size()) + ")");
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ConfigError("'" + path + "' is empty (a header row is required)");
    return table;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

SeriesFrame read_series_frame(const std::string& path) {
    const Table table = read_table(path);
    if (table.header.size() < 2)
        throw ConfigError("'" + path + "' needs a date column plus at least one value column");
    if (table.header[0] != "date")
        throw ConfigError("'" + path + "' must start with a 'date' column, got '" + table.header[0] +
                          "'");
    SeriesFrame frame;
    frame.names.assign(table.header.begin() + 1, table.header.end());
    frame.values.resize(static_cast<Index>(table.rows.size()),
                        static_cast<Index>(frame.names.size()));
    frame.dates.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        frame.dates.push_back(MonthDate::parse(table.rows[r][0]));
        for (size_t c = 0; c < frame.names.size(); ++c)
            frame.values(static_cast<Index>(r), static_cast<Index>(c)) =
                parse_double(table.rows[r][c + 1], path);
    }
    for (size_t i = 1; i < frame.dates.size(); ++i)
        if (!(frame.dates[i - 1] < frame.dates[i]))
            throw ConfigError("dates in '" + path + "' must be strictly increasing");
    return frame;
}

PriceIndexPanel read_price_panel(const std::string& components_path,
                                 const std::string& headline_path,
                                 const std::string& weights_path) {
    const SeriesFrame components = read_series_frame(components_path);
    const SeriesFrame headline = read_series_frame(headline_path);
    if (headline.names.size() != 1)
        throw ConfigError("'" + headline_path + "' must hold exactly one value column");

    const Table wtab = read_table(weights_path);
    if (wtab.header.size() != 2 || wtab.header[0] != "code" || wtab.header[1] != "weight")
        throw ConfigError("'" + weights_path + "' must have columns code,weight");
    std::unordered_map<std::string, double> weight_of;
    for (const auto& row : wtab.rows) weight_of[row[0]] = parse_double(row[1], weights_path);

    // Intersect the two date ranges.
    std::unordered_map<int, Index> h_at;
    for (size_t i = 0; i < headline.dates.size(); ++i)
        h_at.emplace(headline.dates[i].index(), static_cast<Index>(i));
    std::vector<Index> crows;
    std::vector<Index> hrows;
    for (size_t i = 0; i < components.dates.size(); ++i) {
        const auto it = h_at.find(components.dates[i].index());
        if (it == h_at.end()) continue;
        crows.push_back(static_cast<Index>(i));
        hrows.push_back(it->second);
    }
    if (crows.empty())
        throw ConfigError("components and headline files share no dates");

    PriceIndexPanel panel;
    panel.labels = components.names;
    panel.levels.resize(static_cast<Index>(crows.size()), components.values.cols());
    panel.headline_levels.resize(static_cast<Index>(crows.size()));
    for (size_t i = 0; i < crows.size(); ++i) {
        panel.levels.row(static_cast<Index>(i)) = components.values.row(crows[i]);
        panel.headline_levels[static_cast<Index>(i)] = headline.values(hrows[i], 0);
        panel.dates.push_back(components.dates[static_cast<size_t>(crows[i])]);
    }

    panel.headline_weights.resize(static_cast<Index>(panel.labels.size()));
    for (size_t c = 0; c < panel.labels.size(); ++c) {
        const auto it = weight_of.find(panel.labels[c]);
        if (it == weight_of.end())
            throw ConfigError("no weight for component '" + panel.labels[c] + "' in " + weights_path);
        panel.headline_weights[static_cast<Index>(c)] = it->second;
    }
    const double total = panel.headline_weights.sum();
    if (std::abs(total - 1.0) > 1e-6)
        throw ConfigError("headline weights sum to " + std::to_string(total) + ", expected 1");
    panel.headline_weights /= total;

    panel.validate();
    return panel;
}

GroupingMap read_grouping(const std::string& path) {
    const Table table = read_table(path);
    if (table.header.size() != 2 || table.header[0] != "code" || table.header[1] != "group")
        throw ConfigError("'" + path + "' must have columns code,group");
    GroupingMap map;
    for (const auto& row : table.rows) {
        if (!map.group_of.emplace(row[0], row[1]).second)
            throw ConfigError("duplicate component '" + row[0] + "' in " + path);
    }
    return map;
}

}  // namespace assemblage::csv
