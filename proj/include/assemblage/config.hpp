#pragma once

#include <map>
#include <string>
#include <vector>

#include "assemblage/estimators.hpp"
#include "assemblage/synth.hpp"

namespace assemblage {

/// Resolved run configuration. Sourced from an INI-style file ([section]
/// headers, key = value lines, '#' comments), with CLI flags overriding
/// file values.
struct RunConfig {
    // [data]
    std::string components_csv;
    std::string headline_csv;
    std::string weights_csv;
    std::string grouping_csv;
    std::string benchmarks_csv;

    // [model] (+ [cv] folds)
    EstimatorSpec spec;

    // [window]
    WindowScheme window = WindowScheme::rolling(240);

    // [evaluate]
    std::vector<std::pair<MonthDate, MonthDate>> test_ranges;
    std::string numeraire = "equal_weight";  // equal_weight | benchmark
    int retune_every = 12;
    std::vector<int> horizons{12};

    // [output]
    std::string out_dir = "out";

    // [run]
    int threads = 1;

    // [synth]
    SynthSpec synth;

    void validate_for_data() const;  // data paths present and readable
};

/// Parse an INI file into raw section/key/value maps.
std::map<std::string, std::map<std::string, std::string>> parse_ini(const std::string& path);

/// Typed RunConfig from a file (empty path = all defaults).
RunConfig load_config(const std::string& path);

/// Apply one "section.key=value" override (the CLI flag pathway).
void apply_override(RunConfig& config, const std::string& dotted_key, const std::string& value);

/// Fully resolved configuration, printable and re-parsable.
std::string emit_config(const RunConfig& config);

}  // namespace assemblage
