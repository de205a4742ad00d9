#include "assemblage/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace assemblage {

using Eigen::Index;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::AlbacoreComps: return "albacore_comps";
        case Variant::AlbacoreRanks: return "albacore_ranks";
        case Variant::QualbacoreComps: return "qualbacore_comps";
        case Variant::QualbacoreRanks: return "qualbacore_ranks";
        case Variant::RankAR: return "rank_ar";
        case Variant::LagAR: return "lag_ar";
        case Variant::GeoComps: return "geo_comps";
        case Variant::GeoRanks: return "geo_ranks";
        case Variant::BenchmarkCombo: return "benchmark_combo";
    }
    return "albacore_comps";
}

Variant parse_variant(const std::string& name) {
    for (Variant v : {Variant::AlbacoreComps, Variant::AlbacoreRanks, Variant::QualbacoreComps,
                      Variant::QualbacoreRanks, Variant::RankAR, Variant::LagAR, Variant::GeoComps,
                      Variant::GeoRanks, Variant::BenchmarkCombo})
        if (variant_name(v) == name) return v;
    throw ConfigError("unknown estimator variant '" + name + "'");
}

bool is_rank_variant(Variant v) {
    return v == Variant::AlbacoreRanks || v == Variant::QualbacoreRanks || v == Variant::RankAR ||
           v == Variant::GeoRanks;
}

bool is_ar_variant(Variant v) { return v == Variant::RankAR || v == Variant::LagAR; }

bool is_quantile_variant(Variant v) {
    return v == Variant::QualbacoreComps || v == Variant::QualbacoreRanks;
}

LambdaChoice LambdaChoice::fixed(double v) {
    LambdaChoice c;
    c.mode = Mode::Fixed;
    c.value = v;
    return c;
}

LambdaChoice LambdaChoice::cross_validated(Vector grid) {
    LambdaChoice c;
    c.mode = Mode::CrossValidated;
    c.grid = std::move(grid);
    return c;
}

void EstimatorSpec::validate() const {
    if (horizon < 1) throw InvalidInput("horizon must be >= 1");
    if (is_quantile_variant(variant) && !(tau > 0.0 && tau < 1.0))
        throw InvalidInput("tau must lie strictly inside (0,1)");
    if (is_ar_variant(variant) && lags < 1) throw InvalidInput("AR variants need lags >= 1");
    if (smooth_window < 1) throw InvalidInput("smooth window must be >= 1");
    if (lambda.mode == LambdaChoice::Mode::Fixed && !(lambda.value >= 0.0))
        throw InvalidInput("fixed lambda must be >= 0");
    if (cv_folds < 2 && lambda.mode == LambdaChoice::Mode::CrossValidated)
        throw InvalidInput("cross-validation needs at least 2 folds");
}

double empirical_quantile(const Vector& values, double tau) {
    if (values.size() == 0) throw InvalidInput("quantile of an empty sample");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("tau must lie strictly inside (0,1)");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto idx = static_cast<long>(std::ceil(tau * n)) - 1;
    idx = std::clamp<long>(idx, 0, static_cast<long>(sorted.size()) - 1);
    return sorted[static_cast<size_t>(idx)];
}

namespace {

Matrix lag_matrix(const Vector& series, int lags) {
    const Index t = series.size();
    if (t < lags) throw InsufficientHistory("series shorter than the lag window");
    Matrix out(t - lags + 1, lags);
    for (Index row = 0; row + lags <= t; ++row)
        for (int j = 0; j < lags; ++j) out(row, j) = series[row + lags - 1 - j];  // col j = lag j
    return out;
}

std::vector<std::string> indexed_names(const std::string& prefix, Index k) {
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(k));
    for (Index i = 0; i < k; ++i) names.push_back(prefix + std::to_string(i + 1));
    return names;
}

}  // namespace

DesignBundle build_design(const PriceIndexPanel& panel, const EstimatorSpec& spec) {
    spec.validate();
    panel.validate();
    if (spec.variant == Variant::BenchmarkCombo)
        throw InvalidInput("benchmark combos take a prebuilt series matrix; see fit_benchmark");

    DesignBundle out;
    const Vector headline_mom = growth_rate_series(panel.headline_levels, GrowthKind::MoM);
    const std::vector<MonthDate> headline_dates(panel.dates.begin() + 1, panel.dates.end());
    out.target = target_path(headline_dates, headline_mom, spec.horizon);

    if (is_ar_variant(spec.variant)) {
        const Matrix lags = lag_matrix(headline_mom, spec.lags);
        out.component_rates = lags;
        out.component_dates.assign(headline_dates.begin() + (spec.lags - 1), headline_dates.end());
        out.component_names = indexed_names("lag_", spec.lags);
        out.center = Vector::Zero(spec.lags);
        if (spec.variant == Variant::RankAR) {
            out.ordered_raw = to_order_statistics(out.component_dates, lags);
            out.regressors = out.ordered_raw->order_stats;
            out.names = indexed_names("rank_", spec.lags);
        } else {
            out.regressors = lags;
            out.names = out.component_names;
        }
        out.regressor_dates = out.component_dates;
        return out;
    }

    if (is_rank_variant(spec.variant)) {
        // Ranks are taken on month-over-month rates, the sorted series then
        // smoothed with a trailing moving average.
        const GrowthPanel mom = growth_rate(panel, GrowthKind::MoM);
        out.component_rates = mom.rates;
        out.component_dates = mom.dates;
        out.component_names = mom.labels;
        out.ordered_raw = to_order_statistics(mom);
        const OrderedPanel smoothed = smooth_order_stats(*out.ordered_raw, spec.smooth_window);
        out.regressors = smoothed.order_stats;
        out.regressor_dates = smoothed.dates;
        out.names = indexed_names("rank_", panel.components());
        out.center = Vector::Zero(panel.components());
        out.smooth_window = spec.smooth_window;
        return out;
    }

    // Component-space variants.
    const GrowthPanel growth = growth_rate(panel, spec.growth);
    out.regressors = growth.rates;
    out.regressor_dates = growth.dates;
    out.names = growth.labels;
    out.component_rates = growth.rates;
    out.component_dates = growth.dates;
    out.component_names = growth.labels;
    out.center = panel.headline_weights;
    return out;
}

PenalizedProblem make_problem(const EstimatorSpec& spec, const Matrix& design,
                              const Vector& response, const Vector& center, double lambda) {
    const Index k = design.cols();
    PenalizedProblem pb;
    pb.design = design;
    pb.response = response;
    pb.lambda = lambda;
    pb.loss = is_quantile_variant(spec.variant) ? LossSpec::pinball(spec.tau) : LossSpec::squared();
    pb.constraints.nonnegative = true;

    auto mean_match = [&](double rhs) {
        LinearEquality eq;
        eq.coeffs = design.colwise().mean();
        eq.rhs = rhs;
        pb.constraints.equalities.push_back(std::move(eq));
    };

    switch (spec.variant) {
        case Variant::AlbacoreComps:
            pb.penalty = PenaltySpec::centered_ridge(center);
            pb.constraints.equalities.push_back({Vector::Ones(k), 1.0});
            break;
        case Variant::AlbacoreRanks:
        case Variant::GeoRanks:
        case Variant::RankAR:
            pb.penalty = PenaltySpec::fused_ridge();
            mean_match(response.mean());
            break;
        case Variant::QualbacoreComps: {
            const double mean = response.mean();
            if (std::abs(mean) <= 1e-6)
                throw MeanNearZero("target mean " + std::to_string(mean) +
                                   " is too close to zero for the quantile sum constraint");
            pb.penalty = PenaltySpec::centered_ridge(center);
            pb.constraints.equalities.push_back(
                {Vector::Ones(k), empirical_quantile(response, spec.tau) / mean});
            break;
        }
        case Variant::QualbacoreRanks:
            pb.penalty = PenaltySpec::fused_ridge();
            mean_match(empirical_quantile(response, spec.tau));
            break;
        case Variant::LagAR:
            pb.penalty = PenaltySpec::centered_ridge(Vector::Zero(k));
            if (!spec.constrained) {
                pb.constraints.nonnegative = false;
                pb.constraints.include_intercept = true;
            }
            break;
        case Variant::GeoComps:
            pb.penalty = PenaltySpec::centered_ridge(center);
            break;
        case Variant::BenchmarkCombo:
            pb.penalty = PenaltySpec::centered_ridge(Vector::Zero(k));
            pb.lambda = 0.0;  // benchmarks are unregularized
            pb.constraints.include_intercept = spec.with_intercept;
            break;
    }
    return pb;
}

namespace {

PenalizedProblem build_subset_problem(const EstimatorSpec& spec, const Matrix& design,
                                      const Vector& response, const Vector& center,
                                      const std::vector<int>& rows, double lambda) {
    Matrix sub_x(static_cast<Index>(rows.size()), design.cols());
    Vector sub_y(static_cast<Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        sub_x.row(static_cast<Index>(i)) = design.row(rows[i]);
        sub_y[static_cast<Index>(i)] = response[rows[i]];
    }
    return make_problem(spec, sub_x, sub_y, center, lambda);
}

}  // namespace

AssemblageFit fit_rows(const EstimatorSpec& spec, const Matrix& design, const Vector& response,
                       const std::vector<MonthDate>& dates, const Vector& center,
                       const std::vector<std::string>& names, int threads) {
    spec.validate();
    if (design.rows() != response.size() || design.rows() != static_cast<Index>(dates.size()))
        throw ShapeMismatch("design, response and dates disagree on the sample size");
    if (design.rows() < 2) throw TooFewObservations("need at least 2 training rows");

    AssemblageFit fit;
    fit.spec = spec;
    fit.names = names;
    fit.train_first = dates.front();
    fit.train_last = dates.back();
    fit.fitted_dates = dates;

    Matrix x = design;
    if (spec.variant == Variant::GeoComps) {
        GeoTransform tr;
        tr.series_means = design.colwise().mean();
        tr.grand_mean = tr.series_means.mean();
        for (Index c = 0; c < x.cols(); ++c)
            x.col(c).array() += tr.grand_mean - tr.series_means[c];
        fit.geo = std::move(tr);
    }

    double lambda = spec.lambda.value;
    if (spec.lambda.mode == LambdaChoice::Mode::CrossValidated &&
        spec.variant != Variant::BenchmarkCombo) {
        const Vector grid =
            spec.lambda.grid.size() > 0 ? spec.lambda.grid : default_lambda_grid(x);
        const FoldPlan plan = blocked_folds(static_cast<int>(x.rows()), spec.cv_folds);
        const LossSpec loss =
            is_quantile_variant(spec.variant) ? LossSpec::pinball(spec.tau) : LossSpec::squared();
        const ProblemBuilder builder = [&](const std::vector<int>& rows, double lam) {
            return build_subset_problem(spec, x, response, center, rows, lam);
        };
        fit.cv = cross_validate(builder, x, response, grid, plan, loss, threads);
        lambda = fit.cv->chosen_lambda;
    } else if (spec.variant == Variant::BenchmarkCombo) {
        lambda = 0.0;
    }

    const PenalizedProblem pb = make_problem(spec, x, response, center, lambda);
    fit.solution = solve(pb);
    fit.weights = fit.solution.weights;
    fit.intercept = fit.solution.intercept;
    fit.chosen_lambda = lambda;
    fit.fitted = x * fit.weights;
    if (fit.intercept) fit.fitted.array() += *fit.intercept;
    return fit;
}

namespace {

struct RowSelection {
    Matrix design;
    Vector response;
    std::vector<MonthDate> dates;
};

// Rows of the bundle whose date has both a regressor row and a target value,
// optionally restricted to [first, last].
RowSelection select_rows(const DesignBundle& bundle, const MonthDate* first, const MonthDate* last) {
    std::unordered_map<int, Index> target_at;
    for (size_t i = 0; i < bundle.target.origin_dates.size(); ++i)
        target_at.emplace(bundle.target.origin_dates[i].index(), static_cast<Index>(i));

    std::vector<Index> rows;
    std::vector<Index> tgt;
    for (size_t i = 0; i < bundle.regressor_dates.size(); ++i) {
        const MonthDate d = bundle.regressor_dates[i];
        if (first && d < *first) continue;
        if (last && *last < d) continue;
        const auto it = target_at.find(d.index());
        if (it == target_at.end()) continue;
        rows.push_back(static_cast<Index>(i));
        tgt.push_back(it->second);
    }
    if (rows.empty()) throw EmptyIntersection("no usable training rows in the requested range");

    RowSelection sel;
    sel.design.resize(static_cast<Index>(rows.size()), bundle.regressors.cols());
    sel.response.resize(static_cast<Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        sel.design.row(static_cast<Index>(i)) = bundle.regressors.row(rows[i]);
        sel.response[static_cast<Index>(i)] = bundle.target.values[tgt[i]];
        sel.dates.push_back(bundle.regressor_dates[static_cast<size_t>(rows[i])]);
    }
    return sel;
}

}  // namespace

AssemblageFit fit_estimator(const PriceIndexPanel& panel, const EstimatorSpec& spec, int threads) {
    const DesignBundle bundle = build_design(panel, spec);
    const RowSelection sel = select_rows(bundle, nullptr, nullptr);
    return fit_rows(spec, sel.design, sel.response, sel.dates, bundle.center, bundle.names, threads);
}

AssemblageFit fit_estimator(const PriceIndexPanel& panel, const EstimatorSpec& spec,
                            MonthDate train_first, MonthDate train_last, int threads) {
    const DesignBundle bundle = build_design(panel, spec);
    const RowSelection sel = select_rows(bundle, &train_first, &train_last);
    return fit_rows(spec, sel.design, sel.response, sel.dates, bundle.center, bundle.names, threads);
}

double predict(const AssemblageFit& fit, const Vector& row) {
    if (row.size() != fit.weights.size())
        throw ShapeMismatch("regressor row length " + std::to_string(row.size()) +
                            " != fitted weights " + std::to_string(fit.weights.size()));
    const Vector x = fit.geo ? fit.geo->apply_row(row) : row;
    return x.dot(fit.weights) + fit.intercept.value_or(0.0);
}

std::vector<WeightsCurvePoint> weights_curve(const PriceIndexPanel& panel, EstimatorSpec spec,
                                             const std::vector<int>& horizons, int threads) {
    if (horizons.empty()) throw InvalidInput("empty horizon list");

    // Common estimation window: the intersection of usable origin dates
    // across horizons, so curves differ by objective only.
    MonthDate common_first{1, 1}, common_last{9999, 12};
    std::vector<DesignBundle> bundles;
    bundles.reserve(horizons.size());
    for (int h : horizons) {
        EstimatorSpec s = spec;
        s.horizon = h;
        bundles.push_back(build_design(panel, s));
        const RowSelection sel = select_rows(bundles.back(), nullptr, nullptr);
        if (common_first < sel.dates.front()) common_first = sel.dates.front();
        if (sel.dates.back() < common_last) common_last = sel.dates.back();
    }
    if (common_last < common_first)
        throw EmptyIntersection("horizons share no common estimation window");

    std::vector<WeightsCurvePoint> out;
    for (size_t i = 0; i < horizons.size(); ++i) {
        EstimatorSpec s = spec;
        s.horizon = horizons[i];
        const RowSelection sel = select_rows(bundles[i], &common_first, &common_last);
        const AssemblageFit fit =
            fit_rows(s, sel.design, sel.response, sel.dates, bundles[i].center, bundles[i].names, threads);
        const bool ranks = is_rank_variant(s.variant);
        const double rank_ref = ranks ? fit.weights.sum() / static_cast<double>(fit.weights.size())
                                      : 0.0;
        for (Index k = 0; k < fit.weights.size(); ++k) {
            WeightsCurvePoint p;
            p.horizon = horizons[i];
            p.name = fit.names[static_cast<size_t>(k)];
            p.weight = fit.weights[k];
            const double ref = ranks ? rank_ref : bundles[i].center[k];
            p.relative = std::abs(ref) > 1e-12 ? 100.0 * fit.weights[k] / ref
                                               : std::numeric_limits<double>::quiet_NaN();
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace assemblage
