#include "assemblage/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace assemblage {

using Eigen::Index;

int growth_window(GrowthKind kind) {
    switch (kind) {
        case GrowthKind::MoM: return 1;
        case GrowthKind::ThreeMoThree: return 3;
        case GrowthKind::SixMoSix: return 6;
        case GrowthKind::YoY: return 12;
    }
    return 1;
}

std::string growth_kind_name(GrowthKind kind) {
    switch (kind) {
        case GrowthKind::MoM: return "mom";
        case GrowthKind::ThreeMoThree: return "3mo3m";
        case GrowthKind::SixMoSix: return "6mo6m";
        case GrowthKind::YoY: return "yoy";
    }
    return "mom";
}

GrowthKind parse_growth_kind(const std::string& name) {
    if (name == "mom") return GrowthKind::MoM;
    if (name == "3mo3m" || name == "qoq") return GrowthKind::ThreeMoThree;
    if (name == "6mo6m") return GrowthKind::SixMoSix;
    if (name == "yoy") return GrowthKind::YoY;
    throw ConfigError("unknown growth kind '" + name + "' (mom | 3mo3m | 6mo6m | yoy)");
}

void PriceIndexPanel::validate() const {
    const Index t = levels.rows();
    const Index k = levels.cols();
    if (static_cast<Index>(dates.size()) != t)
        throw ShapeMismatch("panel has " + std::to_string(t) + " level rows but " +
                            std::to_string(dates.size()) + " dates");
    if (static_cast<Index>(labels.size()) != k)
        throw ShapeMismatch("panel has " + std::to_string(k) + " columns but " +
                            std::to_string(labels.size()) + " labels");
    if (headline_weights.size() != k)
        throw ShapeMismatch("headline weights length " + std::to_string(headline_weights.size()) +
                            " != K = " + std::to_string(k));
    if (headline_levels.size() != t)
        throw ShapeMismatch("headline series length " + std::to_string(headline_levels.size()) +
                            " != T = " + std::to_string(t));
    for (size_t i = 1; i < dates.size(); ++i)
        if (months_between(dates[i - 1], dates[i]) != 1)
            throw InvalidInput("panel dates must be consecutive months (gap at " + dates[i].str() + ")");
    if ((levels.array() <= 0.0).any() || (headline_levels.array() <= 0.0).any())
        throw NonPositiveLevel("price-index levels must be strictly positive");
    if ((headline_weights.array() < 0.0).any())
        throw InvalidInput("headline weights must be nonnegative");
    if (std::abs(headline_weights.sum() - 1.0) > 1e-9)
        throw InvalidInput("headline weights must sum to 1 (got " +
                           std::to_string(headline_weights.sum()) + ")");
}

WindowScheme WindowScheme::rolling(int months) {
    if (months < 24) throw InvalidInput("rolling windows must span at least 24 months");
    WindowScheme w;
    w.kind = Kind::Rolling;
    w.months = months;
    return w;
}

WindowScheme WindowScheme::expanding(MonthDate start) {
    WindowScheme w;
    w.kind = Kind::Expanding;
    w.start = start;
    return w;
}

WindowScheme WindowScheme::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("cannot parse window '" + text + "' (rolling:MONTHS or expanding:YYYY-MM)");
    const std::string kind = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    if (kind == "rolling") return rolling(std::stoi(arg));
    if (kind == "expanding") return expanding(MonthDate::parse(arg));
    throw ConfigError("unknown window scheme '" + kind + "'");
}

std::string WindowScheme::str() const {
    return kind == Kind::Rolling ? "rolling:" + std::to_string(months) : "expanding:" + start.str();
}

Vector growth_rate_series(const Vector& levels, GrowthKind kind) {
    const int m = growth_window(kind);
    const Index t = levels.size();
    const Index span = 2 * m - 1;
    if (t <= span)
        throw InsufficientHistory("need more than " + std::to_string(span) +
                                  " observations for the " + growth_kind_name(kind) + " transform");
    if ((levels.array() <= 0.0).any())
        throw NonPositiveLevel("price-index levels must be strictly positive");

    // Trailing m-month means of the index, then the m-on-m ratio.
    Vector mean(t);
    double acc = 0.0;
    for (Index i = 0; i < t; ++i) {
        acc += levels[i];
        if (i >= m) acc -= levels[i - m];
        mean[i] = i >= m - 1 ? acc / m : 0.0;
    }
    const double annualize = 100.0 * 12.0 / m;
    Vector rates(t - span);
    for (Index i = span; i < t; ++i) rates[i - span] = (mean[i] / mean[i - m] - 1.0) * annualize;
    return rates;
}

GrowthPanel growth_rate(const std::vector<MonthDate>& dates, const Matrix& levels, GrowthKind kind,
                        std::vector<std::string> labels) {
    const int m = growth_window(kind);
    const Index span = 2 * m - 1;
    const Index t = levels.rows();
    if (static_cast<Index>(dates.size()) != t) throw ShapeMismatch("dates/levels length mismatch");
    if (t <= span)
        throw InsufficientHistory("need more than " + std::to_string(span) +
                                  " observations for the " + growth_kind_name(kind) + " transform");

    GrowthPanel out;
    out.kind = kind;
    out.labels = std::move(labels);
    out.rates.resize(t - span, levels.cols());
    for (Index c = 0; c < levels.cols(); ++c)
        out.rates.col(c) = growth_rate_series(levels.col(c), kind);
    out.dates.assign(dates.begin() + span, dates.end());
    return out;
}

GrowthPanel growth_rate(const PriceIndexPanel& panel, GrowthKind kind) {
    panel.validate();
    return growth_rate(panel.dates, panel.levels, kind, panel.labels);
}

TargetSeries target_path(const std::vector<MonthDate>& dates, const Vector& monthly_rates,
                         int horizon) {
    if (horizon < 1) throw InvalidInput("horizon must be at least 1");
    const Index t = monthly_rates.size();
    if (static_cast<Index>(dates.size()) != t) throw ShapeMismatch("dates/rates length mismatch");
    if (t <= horizon)
        throw InsufficientFuture("no origin has a full " + std::to_string(horizon) +
                                 "-month future in a sample of " + std::to_string(t));

    TargetSeries out;
    out.horizon = horizon;
    out.values.resize(t - horizon);
    for (Index i = 0; i + horizon < t; ++i)
        out.values[i] = monthly_rates.segment(i + 1, horizon).mean();
    out.origin_dates.assign(dates.begin(), dates.end() - horizon);
    return out;
}

AlignedSample align(const GrowthPanel& panel, const TargetSeries& target) {
    std::unordered_map<int, Index> target_at;
    for (size_t i = 0; i < target.origin_dates.size(); ++i)
        target_at.emplace(target.origin_dates[i].index(), static_cast<Index>(i));

    std::vector<Index> panel_rows;
    std::vector<Index> target_rows;
    for (size_t i = 0; i < panel.dates.size(); ++i) {
        const auto it = target_at.find(panel.dates[i].index());
        if (it == target_at.end()) continue;
        panel_rows.push_back(static_cast<Index>(i));
        target_rows.push_back(it->second);
    }
    if (panel_rows.empty()) throw EmptyIntersection("panel and target share no origin dates");

    AlignedSample out;
    out.design.resize(static_cast<Index>(panel_rows.size()), panel.rates.cols());
    out.response.resize(static_cast<Index>(panel_rows.size()));
    out.dates.reserve(panel_rows.size());
    for (size_t i = 0; i < panel_rows.size(); ++i) {
        out.design.row(static_cast<Index>(i)) = panel.rates.row(panel_rows[i]);
        out.response[static_cast<Index>(i)] = target.values[target_rows[i]];
        out.dates.push_back(panel.dates[static_cast<size_t>(panel_rows[i])]);
    }
    return out;
}

std::vector<TrainWindow> windows(const std::vector<MonthDate>& dates, const WindowScheme& scheme,
                                 MonthDate test_first, MonthDate test_last) {
    if (dates.empty()) throw InvalidInput("empty date vector");
    if (test_last < test_first) throw InvalidInput("test range ends before it starts");
    const MonthDate data_first = dates.front();
    const MonthDate data_last = dates.back();
    if (test_first < data_first || data_last < test_last)
        throw InvalidInput("test range " + test_first.str() + ":" + test_last.str() +
                           " not contained in the sample " + data_first.str() + ":" + data_last.str());

    std::vector<TrainWindow> out;
    for (int idx = test_first.index(); idx <= test_last.index(); ++idx) {
        const MonthDate origin = MonthDate::from_index(idx);
        TrainWindow w;
        w.origin = origin;
        w.train_last = origin.plus(-1);
        if (scheme.kind == WindowScheme::Kind::Rolling) {
            w.train_first = origin.plus(-scheme.months);
            if (w.train_first < data_first)
                throw WindowTooLong("rolling window of " + std::to_string(scheme.months) +
                                    " months does not fit before origin " + origin.str());
        } else {
            w.train_first = scheme.start;
            if (w.train_first < data_first)
                throw WindowTooLong("expanding window start " + scheme.start.str() +
                                    " precedes the sample start " + data_first.str());
            if (w.train_last < w.train_first)
                throw WindowTooLong("expanding window is empty at origin " + origin.str());
        }
        out.push_back(w);
    }
    return out;
}

}  // namespace assemblage
