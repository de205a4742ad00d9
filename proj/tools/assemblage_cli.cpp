// Command-line front end: fit | evaluate | weights-curve | decompose |
// properties | synth. Every command is a pure function of the resolved
// config and the input files; outputs are flat CSV/JSON files.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "assemblage/config.hpp"
#include "assemblage/csv.hpp"
#include "assemblage/serialize.hpp"

namespace fs = std::filesystem;
using namespace assemblage;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // dotted key, value
    bool emit_config = false;

    RunConfig resolve() const {
        RunConfig cfg = load_config(config_path);
        for (const auto& [key, value] : overrides) apply_override(cfg, key, value);
        return cfg;
    }
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (INI sections)");
    cmd->add_flag("--emit-config", args.emit_config, "Print the resolved config and exit");

    auto push = [&args](const std::string& key) {
        return [&args, key](const std::string& value) { args.overrides.emplace_back(key, value); };
    };
    cmd->add_option_function<std::string>("--variant", push("model.variant"), "Estimator variant");
    cmd->add_option_function<std::string>("--horizon", push("model.horizon"), "Forecast horizon (months)");
    cmd->add_option_function<std::string>("--growth-kind", push("model.growth"),
                                          "mom | 3mo3m | 6mo6m | yoy");
    cmd->add_option_function<std::string>("--lambda", push("model.lambda"), "'cv' or a fixed value");
    cmd->add_option_function<std::string>("--tau", push("model.tau"), "Quantile level");
    cmd->add_option_function<std::string>("--window", push("window.scheme"),
                                          "rolling:MONTHS or expanding:YYYY-MM");
    cmd->add_option_function<std::string>("--test-range", push("evaluate.test_ranges"),
                                          "YYYY-MM:YYYY-MM[,YYYY-MM:YYYY-MM]");
    cmd->add_option_function<std::string>("--out", push("output.dir"), "Output directory");
    cmd->add_option_function<std::string>("--threads", push("run.threads"), "Worker thread cap");
    cmd->add_option_function<std::string>("--seed", push("run.seed"), "Synthetic-data seed");
    cmd->add_option_function<std::string>("--components", push("data.components"), "Components CSV");
    cmd->add_option_function<std::string>("--headline", push("data.headline"), "Headline CSV");
    cmd->add_option_function<std::string>("--weights", push("data.weights"), "Weights CSV");
    cmd->add_option_function<std::string>("--grouping", push("data.grouping"), "Grouping CSV");
    cmd->add_option_function<std::string>("--benchmarks", push("data.benchmarks"), "Benchmark series CSV");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

PriceIndexPanel load_panel(const RunConfig& cfg) {
    cfg.validate_for_data();
    return csv::read_price_panel(cfg.components_csv, cfg.headline_csv, cfg.weights_csv);
}

void write_weights_csv(const std::string& path, const AssemblageFit& fit) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < fit.weights.size(); ++i)
        rows.push_back({fit.names[static_cast<size_t>(i)], csv::format_double(fit.weights[i])});
    if (fit.intercept)
        rows.push_back({"(intercept)", csv::format_double(*fit.intercept)});
    csv::write_table(path, {"name", "weight"}, rows);
}

int cmd_fit(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    const PriceIndexPanel panel = load_panel(cfg);
    const AssemblageFit fit = fit_estimator(panel, cfg.spec, cfg.threads);
    write_json_file(out_path(cfg, "fit.json"), fit_to_json(fit));
    write_weights_csv(out_path(cfg, "weights.csv"), fit);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < fit.fitted_dates.size(); ++i)
        rows.push_back({fit.fitted_dates[i].str(),
                        csv::format_double(fit.fitted[static_cast<Eigen::Index>(i)])});
    csv::write_table(out_path(cfg, "index.csv"), {"date", "value"}, rows);
    std::cout << "fit: " << variant_name(cfg.spec.variant) << " h=" << cfg.spec.horizon
              << " lambda=" << fit.chosen_lambda << " -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    if (cfg.test_ranges.empty()) throw ConfigError("evaluate needs at least one test range");
    const PriceIndexPanel panel = load_panel(cfg);

    csv::SeriesFrame benchmarks;
    if (cfg.numeraire == "benchmark") {
        if (cfg.benchmarks_csv.empty())
            throw ConfigError("numeraire=benchmark requires data.benchmarks");
        benchmarks = csv::read_series_frame(cfg.benchmarks_csv);
    }

    std::vector<std::vector<std::string>> score_rows;
    nlohmann::json manifest;
    manifest["window"] = cfg.window.str();
    manifest["numeraire"] = cfg.numeraire;
    manifest["runs"] = nlohmann::json::array();

    for (const auto& [range_first, range_last] : cfg.test_ranges) {
        const std::string range_label = range_first.str() + ":" + range_last.str();
        for (int h : cfg.horizons) {
            EstimatorSpec spec = cfg.spec;
            spec.horizon = h;
            OosOptions options;
            options.retune_every = cfg.retune_every;
            options.threads = cfg.threads;
            const OosRun run = run_pseudo_oos(panel, spec, cfg.window, range_first, range_last, options);

            OosRun numeraire;
            if (cfg.numeraire == "benchmark") {
                numeraire = run_benchmark_oos(benchmarks.values, benchmarks.dates, panel, h,
                                              /*with_intercept=*/true, cfg.window, range_first,
                                              range_last);
            } else {
                numeraire = equal_weight_numeraire(panel, spec, range_first, range_last);
            }

            const ScoreTable table = make_score_table(
                {{variant_name(spec.variant), &run}, {cfg.numeraire, &numeraire}}, numeraire);
            for (const auto& row : table.rows)
                score_rows.push_back({range_label, row.model, std::to_string(h),
                                      csv::format_double(row.rmse),
                                      csv::format_double(row.relative_rmse),
                                      row.pinball ? csv::format_double(*row.pinball) : ""});

            nlohmann::json entry;
            entry["test_range"] = range_label;
            entry["horizon"] = h;
            entry["model"] = oos_run_to_json(run);
            entry["numeraire"] = oos_run_to_json(numeraire);
            manifest["runs"].push_back(std::move(entry));
        }
    }
    csv::write_table(out_path(cfg, "scores.csv"),
                     {"test_range", "model", "horizon", "rmse", "relative_rmse", "pinball"},
                     score_rows);
    write_json_file(out_path(cfg, "manifest.json"), manifest);
    std::cout << "evaluate: " << score_rows.size() << " score rows -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_weights_curve(const CommonArgs& args, const std::string& horizons_flag) {
    RunConfig cfg = args.resolve();
    if (!horizons_flag.empty()) apply_override(cfg, "evaluate.horizons", horizons_flag);
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    const PriceIndexPanel panel = load_panel(cfg);
    const auto curve = weights_curve(panel, cfg.spec, cfg.horizons, cfg.threads);
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : curve)
        rows.push_back({std::to_string(p.horizon), p.name, csv::format_double(p.weight),
                        csv::format_double(p.relative)});
    csv::write_table(out_path(cfg, "weights_curve.csv"),
                     {"horizon", "name", "weight", "relative_weight"}, rows);
    std::cout << "weights-curve: " << cfg.horizons.size() << " horizons -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_decompose(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    if (cfg.grouping_csv.empty()) throw ConfigError("decompose requires data.grouping");
    const PriceIndexPanel panel = load_panel(cfg);
    const GroupingMap grouping = csv::read_grouping(cfg.grouping_csv);
    const AssemblageFit fit = fit_estimator(panel, cfg.spec, cfg.threads);
    const Contributions contrib = decompose_contributions(fit, panel, grouping);

    std::vector<std::vector<std::string>> rows;
    for (size_t t = 0; t < contrib.dates.size(); ++t) {
        const std::string date = contrib.dates[t].str();
        for (size_t g = 0; g < contrib.groups.size(); ++g)
            rows.push_back({date, contrib.groups[g],
                            csv::format_double(contrib.values(static_cast<Eigen::Index>(t),
                                                              static_cast<Eigen::Index>(g)))});
        rows.push_back({date, "index", csv::format_double(contrib.total[static_cast<Eigen::Index>(t)])});
    }
    csv::write_table(out_path(cfg, "contributions.csv"), {"date", "series", "value"}, rows);
    std::cout << "decompose: " << contrib.groups.size() << " groups over " << contrib.dates.size()
              << " dates -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_properties(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    const PriceIndexPanel panel = load_panel(cfg);
    const AssemblageFit fit = fit_estimator(panel, cfg.spec, cfg.threads);

    // Headline reference in the same units as the fitted index: the spec'd
    // growth transform for component-space fits, a smoothed monthly rate
    // for rank-space fits.
    std::vector<MonthDate> head_dates;
    Vector head_values;
    if (is_rank_variant(cfg.spec.variant)) {
        const Vector mom = growth_rate_series(panel.headline_levels, GrowthKind::MoM);
        const int w = cfg.spec.smooth_window;
        head_values.resize(mom.size() - w + 1);
        for (Eigen::Index i = w - 1; i < mom.size(); ++i)
            head_values[i - w + 1] = mom.segment(i - w + 1, w).mean();
        head_dates.assign(panel.dates.begin() + w, panel.dates.end());
    } else {
        head_values = growth_rate_series(panel.headline_levels, cfg.spec.growth);
        const int span = 2 * growth_window(cfg.spec.growth) - 1;
        head_dates.assign(panel.dates.begin() + span, panel.dates.end());
    }

    const PropertyReport report =
        series_properties(fit.fitted_dates, fit.fitted, head_dates, head_values);
    csv::write_table(out_path(cfg, "properties.csv"),
                     {"bias", "volatility", "coef_variation", "lead_lag"},
                     {{csv::format_double(report.bias), csv::format_double(report.volatility),
                       csv::format_double(report.coef_variation), std::to_string(report.lead_lag)}});
    std::cout << "properties: bias=" << report.bias << " vol=" << report.volatility
              << " leadlag=" << report.lead_lag << " -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_synth(const CommonArgs& args) {
    RunConfig cfg = args.resolve();
    if (args.emit_config) {
        std::cout << emit_config(cfg);
        return 0;
    }
    const SynthData data = generate_synthetic(cfg.synth);
    const PriceIndexPanel& panel = data.panel;

    std::vector<std::string> comp_header{"date"};
    comp_header.insert(comp_header.end(), panel.labels.begin(), panel.labels.end());
    std::vector<std::vector<std::string>> comp_rows;
    std::vector<std::vector<std::string>> head_rows;
    for (size_t t = 0; t < panel.dates.size(); ++t) {
        std::vector<std::string> row{panel.dates[t].str()};
        for (Eigen::Index c = 0; c < panel.levels.cols(); ++c)
            row.push_back(csv::format_double(panel.levels(static_cast<Eigen::Index>(t), c)));
        comp_rows.push_back(std::move(row));
        head_rows.push_back({panel.dates[t].str(),
                             csv::format_double(panel.headline_levels[static_cast<Eigen::Index>(t)])});
    }
    csv::write_table(out_path(cfg, "components.csv"), comp_header, comp_rows);
    csv::write_table(out_path(cfg, "headline.csv"), {"date", "headline"}, head_rows);

    std::vector<std::vector<std::string>> weight_rows;
    for (size_t c = 0; c < panel.labels.size(); ++c)
        weight_rows.push_back({panel.labels[c],
                               csv::format_double(panel.headline_weights[static_cast<Eigen::Index>(c)])});
    csv::write_table(out_path(cfg, "weights.csv"), {"code", "weight"}, weight_rows);

    std::vector<std::vector<std::string>> group_rows;
    for (const auto& label : panel.labels)
        group_rows.push_back({label, data.grouping.group_of.at(label)});
    csv::write_table(out_path(cfg, "grouping.csv"), {"code", "group"}, group_rows);

    nlohmann::json manifest;
    manifest["seed"] = cfg.synth.seed;
    manifest["months"] = cfg.synth.months;
    manifest["components"] = cfg.synth.components;
    manifest["planted"] = cfg.synth.planted;
    manifest["snr"] = cfg.synth.snr;
    manifest["spike_prob"] = cfg.synth.spike_prob;
    manifest["spike_scale"] = cfg.synth.spike_scale;
    manifest["rho"] = cfg.synth.rho;
    manifest["zero_noise"] = cfg.synth.zero_noise;
    manifest["mode"] = cfg.synth.mode == SynthSpec::Mode::Comps ? "comps" : "ranks";
    nlohmann::json oracle = nlohmann::json::array();
    for (Eigen::Index i = 0; i < data.oracle_weights.size(); ++i)
        oracle.push_back(data.oracle_weights[i]);
    manifest["oracle_weights"] = std::move(oracle);
    write_json_file(out_path(cfg, "synth_manifest.json"), manifest);
    std::cout << "synth: " << cfg.synth.months << " months x " << cfg.synth.components
              << " components -> " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward-looking aggregate index construction toolkit"};
    app.require_subcommand(1);

    CommonArgs fit_args, eval_args, curve_args, decomp_args, prop_args, synth_args;
    std::string horizons_flag;

    CLI::App* fit = app.add_subcommand("fit", "Fit one estimator and export weights");
    add_common_options(fit, fit_args);
    CLI::App* evaluate = app.add_subcommand("evaluate", "Pseudo-out-of-sample score table");
    add_common_options(evaluate, eval_args);
    CLI::App* curve = app.add_subcommand("weights-curve", "Weights across forecast horizons");
    add_common_options(curve, curve_args);
    curve->add_option("--horizons", horizons_flag, "Comma-separated horizon list");
    CLI::App* decompose = app.add_subcommand("decompose", "Per-group contribution series");
    add_common_options(decompose, decomp_args);
    CLI::App* properties = app.add_subcommand("properties", "Bias/volatility/lead-lag diagnostics");
    add_common_options(properties, prop_args);
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic planted-signal dataset");
    add_common_options(synth, synth_args);

    try {
        app.parse(argc, argv);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (evaluate->parsed()) return cmd_evaluate(eval_args);
        if (curve->parsed()) return cmd_weights_curve(curve_args, horizons_flag);
        if (decompose->parsed()) return cmd_decompose(decomp_args);
        if (properties->parsed()) return cmd_properties(prop_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
