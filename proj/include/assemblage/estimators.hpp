#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assemblage/model_selection.hpp"
#include "assemblage/rank_space.hpp"
#include "assemblage/transforms.hpp"

namespace assemblage {

enum class Variant {
    AlbacoreComps,
    AlbacoreRanks,
    QualbacoreComps,
    QualbacoreRanks,
    RankAR,
    LagAR,
    GeoComps,
    GeoRanks,
    BenchmarkCombo,
};

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);
bool is_rank_variant(Variant v);   // regressors are order statistics
bool is_ar_variant(Variant v);     // regressors are headline lags
bool is_quantile_variant(Variant v);

struct LambdaChoice {
    enum class Mode { Fixed, CrossValidated };
    Mode mode = Mode::CrossValidated;
    double value = 0.0;  // Fixed only
    Vector grid;         // optional override; empty = data-scaled default

    static LambdaChoice fixed(double v);
    static LambdaChoice cross_validated(Vector grid = Vector());
};

struct EstimatorSpec {
    Variant variant = Variant::AlbacoreComps;
    int horizon = 12;
    GrowthKind growth = GrowthKind::ThreeMoThree;
    LambdaChoice lambda;
    double tau = 0.85;          // quantile variants
    int lags = 12;              // AR variants
    bool constrained = true;    // LagAR: nonnegative, no intercept
    bool with_intercept = false;  // BenchmarkCombo
    int smooth_window = 3;      // rank variants: moving average of order stats
    int cv_folds = 10;

    void validate() const;
};

/// Everything the estimators need from a dataset, built once per panel and
/// spec: solver regressors (post sort/smooth for rank variants), the
/// forward-average target, the ridge center, plus the component-space view
/// used for weight mapping and decomposition.
struct DesignBundle {
    Matrix regressors;
    std::vector<MonthDate> regressor_dates;
    std::vector<std::string> names;  // regressor names (codes, rank_r, lag_j)
    Vector center;                   // ridge center (headline weights, shares, zeros)
    TargetSeries target;

    Matrix component_rates;  // raw component-space rates backing the regressors
    std::vector<MonthDate> component_dates;
    std::vector<std::string> component_names;
    std::optional<OrderedPanel> ordered_raw;  // rank variants, pre-smoothing
    int smooth_window = 1;
};

DesignBundle build_design(const PriceIndexPanel& panel, const EstimatorSpec& spec);

/// GeoComps regressor transform: demean each series over the training rows
/// and add back the grand mean (a country fixed effect).
struct GeoTransform {
    Vector series_means;
    double grand_mean = 0.0;

    Vector apply_row(const Vector& row) const {
        return row - series_means + Vector::Constant(row.size(), grand_mean);
    }
};

struct AssemblageFit {
    EstimatorSpec spec;
    Vector weights;
    std::optional<double> intercept;
    double chosen_lambda = 0.0;
    MonthDate train_first, train_last;
    WeightSolution solution;  // solver diagnostics
    Vector fitted;            // index over the training window
    std::vector<MonthDate> fitted_dates;
    std::vector<std::string> names;
    std::optional<CvReport> cv;
    std::optional<GeoTransform> geo;
};

/// Build the PenalizedProblem a variant prescribes for the given training
/// data. Moment-dependent equality constraints (mean-match, quantile sum)
/// are computed from these rows.
PenalizedProblem make_problem(const EstimatorSpec& spec, const Matrix& design,
                              const Vector& response, const Vector& center, double lambda);

/// Fit on explicit training rows (cross-validating lambda when asked).
AssemblageFit fit_rows(const EstimatorSpec& spec, const Matrix& design, const Vector& response,
                       const std::vector<MonthDate>& dates, const Vector& center,
                       const std::vector<std::string>& names, int threads = 1);

/// Convenience: build the design from a panel and fit on every usable row
/// (or on the rows inside [train_first, train_last] when given).
AssemblageFit fit_estimator(const PriceIndexPanel& panel, const EstimatorSpec& spec,
                            int threads = 1);
AssemblageFit fit_estimator(const PriceIndexPanel& panel, const EstimatorSpec& spec,
                            MonthDate train_first, MonthDate train_last, int threads = 1);

/// w'x (+ intercept); `row` is a raw regressor row (geo transforms are
/// applied internally).
double predict(const AssemblageFit& fit, const Vector& row);

struct WeightsCurvePoint {
    int horizon;
    std::string name;
    double weight;
    double relative;  // 100 = no deviation from the reference profile
};

/// One independently cross-validated fit per horizon on the common sample.
/// Component curves are reported relative to the ridge center (x100);
/// rank curves relative to the equal-weight profile at the fitted mass.
std::vector<WeightsCurvePoint> weights_curve(const PriceIndexPanel& panel, EstimatorSpec spec,
                                             const std::vector<int>& horizons, int threads = 1);

/// Inverse-CDF (type 1) empirical quantile.
double empirical_quantile(const Vector& values, double tau);

}  // namespace assemblage
