#pragma once

#include <string>
#include <vector>

#include "assemblage/dates.hpp"
#include "assemblage/solver.hpp"

namespace assemblage {

/// Growth transform of a price-index level series: the ratio of trailing
/// m-month means of the index, annualized by simple scaling with 12/m.
enum class GrowthKind { MoM, ThreeMoThree, SixMoSix, YoY };

int growth_window(GrowthKind kind);  // 1, 3, 6 or 12 months
std::string growth_kind_name(GrowthKind kind);
GrowthKind parse_growth_kind(const std::string& name);

/// Monthly price-index levels for K components plus the headline series and
/// its official aggregation weights.
struct PriceIndexPanel {
    std::vector<MonthDate> dates;  // strictly increasing, gap-free
    Matrix levels;                 // T x K, strictly positive
    std::vector<std::string> labels;
    Vector headline_weights;  // nonnegative, sums to 1
    Vector headline_levels;   // T

    Eigen::Index rows() const { return levels.rows(); }
    Eigen::Index components() const { return levels.cols(); }
    void validate() const;
};

struct GrowthPanel {
    std::vector<MonthDate> dates;
    Matrix rates;  // T' x K annualized percent
    GrowthKind kind = GrowthKind::MoM;
    std::vector<std::string> labels;
};

/// Forward average-path target: value at origin t is the mean of the
/// headline monthly rates over t+1 ... t+h.
struct TargetSeries {
    std::vector<MonthDate> origin_dates;
    Vector values;
    int horizon = 1;
};

struct WindowScheme {
    enum class Kind { Rolling, Expanding };
    Kind kind = Kind::Rolling;
    int months = 240;           // Rolling only, >= 24
    MonthDate start{1990, 1};   // Expanding only

    static WindowScheme rolling(int months);
    static WindowScheme expanding(MonthDate start);
    static WindowScheme parse(const std::string& text);  // rolling:240 | expanding:1990-01
    std::string str() const;
};

struct TrainWindow {
    MonthDate train_first;
    MonthDate train_last;
    MonthDate origin;
};

/// Annualized growth rates from levels; drops the first 2m-1 observations.
GrowthPanel growth_rate(const PriceIndexPanel& panel, GrowthKind kind);
GrowthPanel growth_rate(const std::vector<MonthDate>& dates, const Matrix& levels, GrowthKind kind,
                        std::vector<std::string> labels);
Vector growth_rate_series(const Vector& levels, GrowthKind kind);

TargetSeries target_path(const std::vector<MonthDate>& dates, const Vector& monthly_rates,
                         int horizon);

struct AlignedSample {
    Matrix design;
    Vector response;
    std::vector<MonthDate> dates;
};

/// Pair regressor rows with target values by origin date, order preserved.
AlignedSample align(const GrowthPanel& panel, const TargetSeries& target);

/// One training window per test origin; training months always end the
/// month before the origin.
std::vector<TrainWindow> windows(const std::vector<MonthDate>& dates, const WindowScheme& scheme,
                                 MonthDate test_first, MonthDate test_last);

}  // namespace assemblage
