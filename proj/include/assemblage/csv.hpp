#pragma once

#include <string>
#include <vector>

#include "assemblage/evaluation.hpp"
#include "assemblage/transforms.hpp"

namespace assemblage::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, header row required, '.' decimal separator, UTF-8.
Table read_table(const std::string& path);
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

/// Locale-independent float formatting used for every CSV cell.
std::string format_double(double value);

/// Panel assembly from three files: components (date + one column per
/// code), headline (date,value) and weights (code,weight). Dates are
/// intersected across the two series files; weights are validated to sum
/// to 1 within 1e-6 and rescaled exactly.
PriceIndexPanel read_price_panel(const std::string& components_path,
                                 const std::string& headline_path,
                                 const std::string& weights_path);

GroupingMap read_grouping(const std::string& path);  // code,group

struct SeriesFrame {
    std::vector<MonthDate> dates;
    Matrix values;
    std::vector<std::string> names;
};

/// date + N numeric columns.
SeriesFrame read_series_frame(const std::string& path);

}  // namespace assemblage::csv
