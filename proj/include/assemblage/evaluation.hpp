#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assemblage/estimators.hpp"

namespace assemblage {

struct OosPoint {
    MonthDate origin;
    double prediction = 0.0;
    double realized = 0.0;
    bool has_realized = false;
    double lambda_used = 0.0;
};

struct OosRun {
    EstimatorSpec spec;
    WindowScheme window;
    std::vector<OosPoint> points;
    std::vector<std::string> skipped;  // "origin: reason"
};

struct OosOptions {
    int retune_every = 12;  // cross-validate lambda at every n-th origin
    int threads = 1;
};

/// Pseudo-out-of-sample harness: per test origin, rebuild the training
/// window, re-select lambda on the retuning cadence, fit and predict.
/// Origins whose window or regressor row is unavailable are skipped with a
/// logged reason; realized targets are attached where they exist.
OosRun run_pseudo_oos(const PriceIndexPanel& panel, const EstimatorSpec& spec,
                      const WindowScheme& window, MonthDate test_first, MonthDate test_last,
                      const OosOptions& options = {});

/// Fixed equal-weight aggregate of the same regressors as `like`, used as a
/// numeraire: prediction at an origin is the plain mean of the regressor row.
OosRun equal_weight_numeraire(const PriceIndexPanel& panel, const EstimatorSpec& like,
                              MonthDate test_first, MonthDate test_last);

/// Benchmark-combo harness: per origin, refit the nonnegative regression of
/// the forward target on the given candidate series over the training
/// window and predict from the origin row.
OosRun run_benchmark_oos(const Matrix& series, const std::vector<MonthDate>& series_dates,
                         const PriceIndexPanel& panel, int horizon, bool with_intercept,
                         const WindowScheme& window, MonthDate test_first, MonthDate test_last);

double rmse(const OosRun& run);
double relative_rmse(const OosRun& run, const OosRun& numeraire);
double quantile_score(const OosRun& run, double tau);

struct ScoreRow {
    std::string model;
    double rmse = 0.0;
    double relative_rmse = 1.0;
    std::optional<double> pinball;  // quantile variants only
};

struct ScoreTable {
    std::vector<ScoreRow> rows;
};

/// Rows in input order; relative RMSE against `numeraire` (itself included
/// with ratio exactly 1).
ScoreTable make_score_table(const std::vector<std::pair<std::string, const OosRun*>>& runs,
                            const OosRun& numeraire);

/// Nonnegative regression on a matrix of candidate series (BenchmarkCombo).
AssemblageFit fit_benchmark(const Matrix& series, const Vector& target,
                            const std::vector<MonthDate>& dates,
                            const std::vector<std::string>& names, bool with_intercept);

struct PropertyReport {
    double bias = 0.0;              // mean(candidate) - mean(headline)
    double volatility = 0.0;        // sd(candidate) / sd(headline)
    double coef_variation = 0.0;    // sd(candidate) / mean(candidate)
    int lead_lag = 0;               // positive = candidate leads headline
};

PropertyReport series_properties(const std::vector<MonthDate>& candidate_dates,
                                 const Vector& candidate,
                                 const std::vector<MonthDate>& headline_dates,
                                 const Vector& headline, int max_offset = 12);

struct GroupingMap {
    std::map<std::string, std::string> group_of;

    const std::string& group(const std::string& code) const;
    std::vector<std::string> groups() const;  // sorted unique labels
};

struct Contributions {
    std::vector<MonthDate> dates;
    std::vector<std::string> groups;  // plus "(intercept)" when present
    Matrix values;                    // T x G
    Vector total;                     // row sums = fitted index
};

/// Per-date per-group contributions to the fitted index. Rank-space fits
/// are first mapped to component space through the recorded allocation
/// permutations (honoring the smoothing window), so group contributions
/// add up to the fitted index exactly. An "(intercept)" group carries the
/// intercept when the fit has one.
Contributions decompose_contributions(const AssemblageFit& fit, const PriceIndexPanel& panel,
                                      const GroupingMap& grouping);

/// Same, over explicit component-space rows (used for fits whose regressors
/// do not come from a price panel, e.g. benchmark combos). For rank-space
/// fits pass the raw ordered panel and the smoothing window used.
Contributions decompose_contributions(const AssemblageFit& fit, const Matrix& component_rates,
                                      const std::vector<MonthDate>& dates,
                                      const std::vector<std::string>& names,
                                      const GroupingMap& grouping,
                                      const OrderedPanel* ordered_raw = nullptr,
                                      int smooth_window = 1);

}  // namespace assemblage
