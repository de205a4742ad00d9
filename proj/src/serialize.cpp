#include "assemblage/serialize.hpp"

#include <fstream>

namespace assemblage {

using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& arr) {
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

}  // namespace

json spec_to_json(const EstimatorSpec& spec) {
    json j;
    j["variant"] = variant_name(spec.variant);
    j["horizon"] = spec.horizon;
    j["growth_kind"] = growth_kind_name(spec.growth);
    j["tau"] = spec.tau;
    j["lags"] = spec.lags;
    j["constrained"] = spec.constrained;
    j["with_intercept"] = spec.with_intercept;
    j["smooth_window"] = spec.smooth_window;
    j["cv_folds"] = spec.cv_folds;
    if (spec.lambda.mode == LambdaChoice::Mode::Fixed) {
        j["lambda"] = {{"mode", "fixed"}, {"value", spec.lambda.value}};
    } else {
        j["lambda"] = {{"mode", "cv"}};
        if (spec.lambda.grid.size() > 0) j["lambda"]["grid"] = vector_to_json(spec.lambda.grid);
    }
    return j;
}

EstimatorSpec spec_from_json(const json& j) {
    EstimatorSpec spec;
    spec.variant = parse_variant(j.at("variant").get<std::string>());
    spec.horizon = j.at("horizon").get<int>();
    spec.growth = parse_growth_kind(j.at("growth_kind").get<std::string>());
    spec.tau = j.at("tau").get<double>();
    spec.lags = j.at("lags").get<int>();
    spec.constrained = j.at("constrained").get<bool>();
    spec.with_intercept = j.at("with_intercept").get<bool>();
    spec.smooth_window = j.at("smooth_window").get<int>();
    spec.cv_folds = j.at("cv_folds").get<int>();
    const json& lam = j.at("lambda");
    if (lam.at("mode").get<std::string>() == "fixed") {
        spec.lambda = LambdaChoice::fixed(lam.at("value").get<double>());
    } else {
        Vector grid;
        if (lam.contains("grid")) grid = vector_from_json(lam["grid"]);
        spec.lambda = LambdaChoice::cross_validated(std::move(grid));
    }
    spec.validate();
    return spec;
}

json fit_to_json(const AssemblageFit& fit) {
    json j;
    j["spec"] = spec_to_json(fit.spec);
    j["names"] = fit.names;
    j["weights"] = vector_to_json(fit.weights);
    if (fit.intercept) j["intercept"] = *fit.intercept;
    j["chosen_lambda"] = fit.chosen_lambda;
    j["train_first"] = fit.train_first.str();
    j["train_last"] = fit.train_last.str();
    j["diagnostics"] = {{"objective", fit.solution.objective},
                        {"kkt_stationarity", fit.solution.kkt_stationarity},
                        {"kkt_feasibility", fit.solution.kkt_feasibility},
                        {"iterations", fit.solution.iterations},
                        {"converged", fit.solution.converged}};
    if (fit.geo) {
        j["geo_transform"] = {{"series_means", vector_to_json(fit.geo->series_means)},
                              {"grand_mean", fit.geo->grand_mean}};
    }
    if (fit.cv) {
        j["cv"] = {{"grid", vector_to_json(fit.cv->grid)},
                   {"mean_scores", vector_to_json(fit.cv->mean_scores)},
                   {"chosen_lambda", fit.cv->chosen_lambda},
                   {"chosen_index", fit.cv->chosen_index}};
        json folds = json::array();
        for (Eigen::Index f = 0; f < fit.cv->fold_scores.rows(); ++f)
            folds.push_back(vector_to_json(fit.cv->fold_scores.row(f).transpose()));
        j["cv"]["fold_scores"] = std::move(folds);
        json warnings = json::array();
        for (const auto& w : fit.cv->warnings)
            warnings.push_back({{"fold", w.fold}, {"lambda", w.lambda}, {"message", w.message}});
        j["cv"]["warnings"] = std::move(warnings);
    }
    json fitted = json::array();
    for (size_t i = 0; i < fit.fitted_dates.size(); ++i)
        fitted.push_back({{"date", fit.fitted_dates[i].str()},
                          {"value", fit.fitted[static_cast<Eigen::Index>(i)]}});
    j["fitted"] = std::move(fitted);
    return j;
}

AssemblageFit fit_from_json(const json& j) {
    AssemblageFit fit;
    fit.spec = spec_from_json(j.at("spec"));
    fit.names = j.at("names").get<std::vector<std::string>>();
    fit.weights = vector_from_json(j.at("weights"));
    if (j.contains("intercept")) fit.intercept = j["intercept"].get<double>();
    fit.chosen_lambda = j.at("chosen_lambda").get<double>();
    fit.train_first = MonthDate::parse(j.at("train_first").get<std::string>());
    fit.train_last = MonthDate::parse(j.at("train_last").get<std::string>());
    const json& diag = j.at("diagnostics");
    fit.solution.weights = fit.weights;
    fit.solution.objective = diag.at("objective").get<double>();
    fit.solution.kkt_stationarity = diag.at("kkt_stationarity").get<double>();
    fit.solution.kkt_feasibility = diag.at("kkt_feasibility").get<double>();
    fit.solution.iterations = diag.at("iterations").get<int>();
    fit.solution.converged = diag.at("converged").get<bool>();
    if (j.contains("geo_transform")) {
        GeoTransform tr;
        tr.series_means = vector_from_json(j["geo_transform"].at("series_means"));
        tr.grand_mean = j["geo_transform"].at("grand_mean").get<double>();
        fit.geo = std::move(tr);
    }
    if (j.contains("fitted")) {
        const json& fitted = j["fitted"];
        fit.fitted.resize(static_cast<Eigen::Index>(fitted.size()));
        for (size_t i = 0; i < fitted.size(); ++i) {
            fit.fitted_dates.push_back(MonthDate::parse(fitted[i].at("date").get<std::string>()));
            fit.fitted[static_cast<Eigen::Index>(i)] = fitted[i].at("value").get<double>();
        }
    }
    return fit;
}

json oos_run_to_json(const OosRun& run) {
    json j;
    j["spec"] = spec_to_json(run.spec);
    j["window"] = run.window.str();
    json points = json::array();
    for (const auto& p : run.points) {
        json pj = {{"origin", p.origin.str()},
                   {"prediction", p.prediction},
                   {"lambda_used", p.lambda_used}};
        if (p.has_realized) pj["realized"] = p.realized;
        points.push_back(std::move(pj));
    }
    j["points"] = std::move(points);
    j["skipped"] = run.skipped;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("cannot parse JSON in '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace assemblage
