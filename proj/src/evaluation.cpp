#include "assemblage/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace assemblage {

using Eigen::Index;

namespace {

std::unordered_map<int, Index> index_by_date(const std::vector<MonthDate>& dates) {
    std::unordered_map<int, Index> map;
    for (size_t i = 0; i < dates.size(); ++i) map.emplace(dates[i].index(), static_cast<Index>(i));
    return map;
}

}  // namespace

OosRun run_pseudo_oos(const PriceIndexPanel& panel, const EstimatorSpec& spec,
                      const WindowScheme& window, MonthDate test_first, MonthDate test_last,
                      const OosOptions& options) {
    spec.validate();
    if (test_last < test_first) throw InvalidInput("test range ends before it starts");

    const DesignBundle bundle = build_design(panel, spec);
    const auto reg_at = index_by_date(bundle.regressor_dates);
    const auto tgt_at = index_by_date(bundle.target.origin_dates);

    OosRun run;
    run.spec = spec;
    run.window = window;

    const bool cv_mode = spec.lambda.mode == LambdaChoice::Mode::CrossValidated &&
                         spec.variant != Variant::BenchmarkCombo;
    double current_lambda = spec.lambda.value;
    bool have_lambda = !cv_mode;

    for (int idx = test_first.index(); idx <= test_last.index(); ++idx) {
        const MonthDate origin = MonthDate::from_index(idx);
        const auto skip = [&](const std::string& reason) {
            run.skipped.push_back(origin.str() + ": " + reason);
        };

        const auto row_it = reg_at.find(origin.index());
        if (row_it == reg_at.end()) {
            skip("no regressor row at the origin");
            continue;
        }

        TrainWindow w;
        try {
            w = windows(bundle.regressor_dates, window, origin, origin).front();
        } catch (const Error& e) {
            skip(e.what());
            continue;
        }

        // Training rows: window months with both a regressor row and a target.
        std::vector<Index> rows;
        for (int d = w.train_first.index(); d <= w.train_last.index(); ++d) {
            const auto r = reg_at.find(d);
            if (r == reg_at.end()) continue;
            if (tgt_at.find(d) == tgt_at.end()) continue;
            rows.push_back(r->second);
        }
        const int min_rows = cv_mode ? std::max(spec.cv_folds, 2) : 2;
        if (static_cast<int>(rows.size()) < min_rows) {
            skip("only " + std::to_string(rows.size()) + " usable training rows");
            continue;
        }

        Matrix x(static_cast<Index>(rows.size()), bundle.regressors.cols());
        Vector y(static_cast<Index>(rows.size()));
        std::vector<MonthDate> dates;
        dates.reserve(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            x.row(static_cast<Index>(i)) = bundle.regressors.row(rows[i]);
            y[static_cast<Index>(i)] = bundle.target.values[tgt_at.at(
                bundle.regressor_dates[static_cast<size_t>(rows[i])].index())];
            dates.push_back(bundle.regressor_dates[static_cast<size_t>(rows[i])]);
        }

        const bool retune =
            cv_mode && (!have_lambda || (idx - test_first.index()) % options.retune_every == 0);
        EstimatorSpec fit_spec = spec;
        if (cv_mode && !retune) fit_spec.lambda = LambdaChoice::fixed(current_lambda);

        AssemblageFit fit;
        try {
            fit = fit_rows(fit_spec, x, y, dates, bundle.center, bundle.names, options.threads);
        } catch (const Error& e) {
            skip(e.what());
            continue;
        }
        if (retune) {
            current_lambda = fit.chosen_lambda;
            have_lambda = true;
        }

        OosPoint point;
        point.origin = origin;
        point.lambda_used = fit.chosen_lambda;
        point.prediction = predict(fit, bundle.regressors.row(row_it->second).transpose());
        const auto realized = tgt_at.find(origin.index());
        if (realized != tgt_at.end()) {
            point.realized = bundle.target.values[realized->second];
            point.has_realized = true;
        }
        run.points.push_back(point);
    }
    return run;
}

OosRun equal_weight_numeraire(const PriceIndexPanel& panel, const EstimatorSpec& like,
                              MonthDate test_first, MonthDate test_last) {
    const DesignBundle bundle = build_design(panel, like);
    const auto reg_at = index_by_date(bundle.regressor_dates);
    const auto tgt_at = index_by_date(bundle.target.origin_dates);

    OosRun run;
    run.spec = like;
    run.window = WindowScheme::expanding(MonthDate{1900, 1});
    for (int idx = test_first.index(); idx <= test_last.index(); ++idx) {
        const MonthDate origin = MonthDate::from_index(idx);
        const auto row_it = reg_at.find(origin.index());
        if (row_it == reg_at.end()) {
            run.skipped.push_back(origin.str() + ": no regressor row at the origin");
            continue;
        }
        OosPoint point;
        point.origin = origin;
        point.prediction = bundle.regressors.row(row_it->second).mean();
        const auto realized = tgt_at.find(origin.index());
        if (realized != tgt_at.end()) {
            point.realized = bundle.target.values[realized->second];
            point.has_realized = true;
        }
        run.points.push_back(point);
    }
    return run;
}

OosRun run_benchmark_oos(const Matrix& series, const std::vector<MonthDate>& series_dates,
                         const PriceIndexPanel& panel, int horizon, bool with_intercept,
                         const WindowScheme& window, MonthDate test_first, MonthDate test_last) {
    if (series.rows() != static_cast<Index>(series_dates.size()))
        throw ShapeMismatch("benchmark series/dates length mismatch");
    const Vector headline_mom = growth_rate_series(panel.headline_levels, GrowthKind::MoM);
    const std::vector<MonthDate> headline_dates(panel.dates.begin() + 1, panel.dates.end());
    const TargetSeries target = target_path(headline_dates, headline_mom, horizon);

    const auto reg_at = index_by_date(series_dates);
    const auto tgt_at = index_by_date(target.origin_dates);

    std::vector<std::string> names;
    for (Index c = 0; c < series.cols(); ++c) names.push_back("bm_" + std::to_string(c + 1));

    OosRun run;
    run.spec.variant = Variant::BenchmarkCombo;
    run.spec.horizon = horizon;
    run.spec.with_intercept = with_intercept;
    run.spec.lambda = LambdaChoice::fixed(0.0);
    run.window = window;
    for (int idx = test_first.index(); idx <= test_last.index(); ++idx) {
        const MonthDate origin = MonthDate::from_index(idx);
        const auto row_it = reg_at.find(origin.index());
        if (row_it == reg_at.end()) {
            run.skipped.push_back(origin.str() + ": no benchmark row at the origin");
            continue;
        }
        TrainWindow w;
        try {
            w = windows(series_dates, window, origin, origin).front();
        } catch (const Error& e) {
            run.skipped.push_back(origin.str() + ": " + std::string(e.what()));
            continue;
        }
        std::vector<Index> rows;
        for (int d = w.train_first.index(); d <= w.train_last.index(); ++d) {
            const auto r = reg_at.find(d);
            if (r == reg_at.end() || tgt_at.find(d) == tgt_at.end()) continue;
            rows.push_back(r->second);
        }
        if (rows.size() < 2) {
            run.skipped.push_back(origin.str() + ": too few training rows");
            continue;
        }
        Matrix x(static_cast<Index>(rows.size()), series.cols());
        Vector y(static_cast<Index>(rows.size()));
        std::vector<MonthDate> dates;
        for (size_t i = 0; i < rows.size(); ++i) {
            x.row(static_cast<Index>(i)) = series.row(rows[i]);
            const MonthDate d = series_dates[static_cast<size_t>(rows[i])];
            y[static_cast<Index>(i)] = target.values[tgt_at.at(d.index())];
            dates.push_back(d);
        }
        OosPoint point;
        point.origin = origin;
        try {
            const AssemblageFit fit = fit_benchmark(x, y, dates, names, with_intercept);
            point.prediction = predict(fit, series.row(row_it->second).transpose());
        } catch (const Error& e) {
            run.skipped.push_back(origin.str() + ": " + std::string(e.what()));
            continue;
        }
        const auto realized = tgt_at.find(origin.index());
        if (realized != tgt_at.end()) {
            point.realized = target.values[realized->second];
            point.has_realized = true;
        }
        run.points.push_back(point);
    }
    return run;
}

double rmse(const OosRun& run) {
    double acc = 0.0;
    int n = 0;
    for (const auto& p : run.points) {
        if (!p.has_realized) continue;
        const double e = p.realized - p.prediction;
        acc += e * e;
        ++n;
    }
    if (n == 0) throw EmptyIntersection("no scored origins in the run");
    return std::sqrt(acc / n);
}

namespace {

double rmse_on(const OosRun& run, const std::set<int>& origins) {
    double acc = 0.0;
    int n = 0;
    for (const auto& p : run.points) {
        if (!p.has_realized || origins.find(p.origin.index()) == origins.end()) continue;
        const double e = p.realized - p.prediction;
        acc += e * e;
        ++n;
    }
    if (n == 0) throw EmptyIntersection("no common scored origins");
    return std::sqrt(acc / n);
}

}  // namespace

double relative_rmse(const OosRun& run, const OosRun& numeraire) {
    std::set<int> a, common;
    for (const auto& p : run.points)
        if (p.has_realized) a.insert(p.origin.index());
    for (const auto& p : numeraire.points)
        if (p.has_realized && a.count(p.origin.index())) common.insert(p.origin.index());
    if (common.empty()) throw EmptyIntersection("runs share no scored origins");
    return rmse_on(run, common) / rmse_on(numeraire, common);
}

double quantile_score(const OosRun& run, double tau) {
    double acc = 0.0;
    int n = 0;
    for (const auto& p : run.points) {
        if (!p.has_realized) continue;
        acc += pinball(tau, p.realized - p.prediction);
        ++n;
    }
    if (n == 0) throw EmptyIntersection("no scored origins in the run");
    return acc / n;
}

ScoreTable make_score_table(const std::vector<std::pair<std::string, const OosRun*>>& runs,
                            const OosRun& numeraire) {
    ScoreTable table;
    for (const auto& [name, run] : runs) {
        ScoreRow row;
        row.model = name;
        row.rmse = rmse(*run);
        row.relative_rmse = run == &numeraire ? 1.0 : relative_rmse(*run, numeraire);
        if (is_quantile_variant(run->spec.variant))
            row.pinball = quantile_score(*run, run->spec.tau);
        table.rows.push_back(std::move(row));
    }
    return table;
}

AssemblageFit fit_benchmark(const Matrix& series, const Vector& target,
                            const std::vector<MonthDate>& dates,
                            const std::vector<std::string>& names, bool with_intercept) {
    EstimatorSpec spec;
    spec.variant = Variant::BenchmarkCombo;
    spec.with_intercept = with_intercept;
    spec.lambda = LambdaChoice::fixed(0.0);
    return fit_rows(spec, series, target, dates, Vector::Zero(series.cols()), names);
}

PropertyReport series_properties(const std::vector<MonthDate>& candidate_dates,
                                 const Vector& candidate,
                                 const std::vector<MonthDate>& headline_dates,
                                 const Vector& headline, int max_offset) {
    if (static_cast<Index>(candidate_dates.size()) != candidate.size() ||
        static_cast<Index>(headline_dates.size()) != headline.size())
        throw ShapeMismatch("dates/series length mismatch");
    const auto h_at = index_by_date(headline_dates);

    std::vector<double> c_overlap, h_overlap;
    for (size_t i = 0; i < candidate_dates.size(); ++i) {
        const auto it = h_at.find(candidate_dates[i].index());
        if (it == h_at.end()) continue;
        c_overlap.push_back(candidate[static_cast<Index>(i)]);
        h_overlap.push_back(headline[it->second]);
    }
    const int n = static_cast<int>(c_overlap.size());
    if (n < 24) throw TooFewObservations("series overlap shorter than 24 months");

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto sd_of = [&](const std::vector<double>& v, double m) {
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    const double mean_c = mean_of(c_overlap);
    const double mean_h = mean_of(h_overlap);
    const double sd_c = sd_of(c_overlap, mean_c);
    const double sd_h = sd_of(h_overlap, mean_h);
    if (sd_c <= 0.0 || sd_h <= 0.0) throw DegenerateSeries("a series has zero variance");

    PropertyReport report;
    report.bias = mean_c - mean_h;
    report.volatility = sd_c / sd_h;
    if (std::abs(mean_c) <= 1e-9)
        throw MeanNearZero("candidate mean too close to zero for a coefficient of variation");
    report.coef_variation = sd_c / mean_c;

    // Lead/lag: Pearson correlation of candidate_t with headline_{t+offset},
    // demeaned on each offset's own overlap; positive offsets = candidate
    // leads. Ties go to the smallest |offset|.
    const auto c_at = index_by_date(candidate_dates);
    double best_corr = -2.0;
    int best_offset = 0;
    for (int a = 0; a <= max_offset; ++a) {
        for (int offset : {a, -a}) {
            if (a == 0 && offset < 0) continue;
            std::vector<double> x, y;
            for (size_t i = 0; i < candidate_dates.size(); ++i) {
                const auto it = h_at.find(candidate_dates[i].index() + offset);
                if (it == h_at.end()) continue;
                x.push_back(candidate[static_cast<Index>(i)]);
                y.push_back(headline[it->second]);
            }
            if (static_cast<int>(x.size()) < 8) continue;
            const double mx = mean_of(x), my = mean_of(y);
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (size_t i = 0; i < x.size(); ++i) {
                sxy += (x[i] - mx) * (y[i] - my);
                sxx += (x[i] - mx) * (x[i] - mx);
                syy += (y[i] - my) * (y[i] - my);
            }
            if (sxx <= 0.0 || syy <= 0.0) continue;
            const double corr = sxy / std::sqrt(sxx * syy);
            if (corr > best_corr + 1e-15) {
                best_corr = corr;
                best_offset = offset;
            }
        }
    }
    report.lead_lag = best_offset;
    return report;
}

const std::string& GroupingMap::group(const std::string& code) const {
    const auto it = group_of.find(code);
    if (it == group_of.end()) throw UnmappedComponent("component '" + code + "' has no group");
    return it->second;
}

std::vector<std::string> GroupingMap::groups() const {
    std::set<std::string> uniq;
    for (const auto& [code, g] : group_of) uniq.insert(g);
    return {uniq.begin(), uniq.end()};
}

Contributions decompose_contributions(const AssemblageFit& fit, const Matrix& component_rates,
                                      const std::vector<MonthDate>& dates,
                                      const std::vector<std::string>& names,
                                      const GroupingMap& grouping, const OrderedPanel* ordered_raw,
                                      int smooth_window) {
    const Index k = component_rates.cols();
    if (static_cast<Index>(names.size()) != k) throw ShapeMismatch("names/rates width mismatch");
    if (fit.weights.size() != k)
        throw ShapeMismatch("fit has " + std::to_string(fit.weights.size()) + " weights but " +
                            std::to_string(k) + " component series were given");

    // group labels present among these components, in sorted order
    std::set<std::string> labels;
    for (const auto& name : names) labels.insert(grouping.group(name));
    std::vector<std::string> group_names(labels.begin(), labels.end());
    const bool has_intercept = fit.intercept.has_value();
    std::unordered_map<std::string, Index> group_col;
    for (size_t g = 0; g < group_names.size(); ++g)
        group_col.emplace(group_names[g], static_cast<Index>(g));

    Contributions out;
    out.groups = group_names;
    if (has_intercept) out.groups.push_back("(intercept)");

    const bool ranks = is_rank_variant(fit.spec.variant);
    if (ranks) {
        if (!ordered_raw) throw InvalidInput("rank-space decomposition needs the raw ordered panel");
        const Matrix w_ct = rank_to_component_weights(fit.weights, *ordered_raw);
        const Index t_raw = component_rates.rows();
        if (w_ct.rows() != t_raw) throw ShapeMismatch("ordered panel/rates row mismatch");
        const Index t_out = t_raw - smooth_window + 1;
        out.values = Matrix::Zero(t_out, static_cast<Index>(out.groups.size()));
        out.dates.assign(dates.begin() + (smooth_window - 1), dates.end());
        for (Index row = 0; row < t_out; ++row) {
            for (int j = 0; j < smooth_window; ++j) {
                const Index raw = row + smooth_window - 1 - j;
                for (Index c = 0; c < k; ++c) {
                    const Index g = group_col.at(grouping.group(names[static_cast<size_t>(c)]));
                    out.values(row, g) +=
                        w_ct(raw, c) * component_rates(raw, c) / static_cast<double>(smooth_window);
                }
            }
        }
    } else {
        out.values = Matrix::Zero(component_rates.rows(), static_cast<Index>(out.groups.size()));
        out.dates = dates;
        for (Index row = 0; row < component_rates.rows(); ++row) {
            Vector x = component_rates.row(row).transpose();
            if (fit.geo) x = fit.geo->apply_row(x);
            for (Index c = 0; c < k; ++c) {
                const Index g = group_col.at(grouping.group(names[static_cast<size_t>(c)]));
                out.values(row, g) += fit.weights[c] * x[c];
            }
        }
    }
    if (has_intercept)
        out.values.col(static_cast<Index>(out.groups.size()) - 1).setConstant(*fit.intercept);
    out.total = out.values.rowwise().sum();
    return out;
}

Contributions decompose_contributions(const AssemblageFit& fit, const PriceIndexPanel& panel,
                                      const GroupingMap& grouping) {
    const DesignBundle bundle = build_design(panel, fit.spec);
    return decompose_contributions(fit, bundle.component_rates, bundle.component_dates,
                                   bundle.component_names, grouping,
                                   bundle.ordered_raw ? &*bundle.ordered_raw : nullptr,
                                   bundle.smooth_window);
}

}  // namespace assemblage
