#include "assemblage/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace assemblage {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("cannot parse boolean '" + v + "'");
}

int parse_int(const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse integer '" + v + "'");
    }
}

double parse_num(const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number '" + v + "'");
    }
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> parse_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string line;
    std::string current = "";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        sections[current][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return sections;
}

void apply_override(RunConfig& c, const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override key '" + dotted_key + "' must be section.key");
    const std::string section = dotted_key.substr(0, dot);
    const std::string key = dotted_key.substr(dot + 1);

    if (section == "data") {
        if (key == "components") c.components_csv = value;
        else if (key == "headline") c.headline_csv = value;
        else if (key == "weights") c.weights_csv = value;
        else if (key == "grouping") c.grouping_csv = value;
        else if (key == "benchmarks") c.benchmarks_csv = value;
        else throw ConfigError("unknown [data] key '" + key + "'");
        return;
    }
    if (section == "model") {
        if (key == "variant") c.spec.variant = parse_variant(value);
        else if (key == "horizon") c.spec.horizon = parse_int(value);
        else if (key == "growth") c.spec.growth = parse_growth_kind(value);
        else if (key == "lambda") {
            if (value == "cv") c.spec.lambda = LambdaChoice::cross_validated();
            else c.spec.lambda = LambdaChoice::fixed(parse_num(value));
        } else if (key == "tau") c.spec.tau = parse_num(value);
        else if (key == "lags") c.spec.lags = parse_int(value);
        else if (key == "constrained") c.spec.constrained = parse_bool(value);
        else if (key == "with_intercept") c.spec.with_intercept = parse_bool(value);
        else if (key == "smooth_window") c.spec.smooth_window = parse_int(value);
        else throw ConfigError("unknown [model] key '" + key + "'");
        return;
    }
    if (section == "cv") {
        if (key == "folds") c.spec.cv_folds = parse_int(value);
        else throw ConfigError("unknown [cv] key '" + key + "'");
        return;
    }
    if (section == "window") {
        if (key == "scheme") c.window = WindowScheme::parse(value);
        else throw ConfigError("unknown [window] key '" + key + "'");
        return;
    }
    if (section == "evaluate") {
        if (key == "test_ranges") {
            c.test_ranges.clear();
            for (const auto& part : split(value, ','))
                if (!part.empty()) c.test_ranges.push_back(parse_month_interval(part));
        } else if (key == "numeraire") {
            if (value != "equal_weight" && value != "benchmark")
                throw ConfigError("numeraire must be equal_weight or benchmark");
            c.numeraire = value;
        } else if (key == "retune_every") c.retune_every = parse_int(value);
        else if (key == "horizons") {
            c.horizons.clear();
            for (const auto& part : split(value, ','))
                if (!part.empty()) c.horizons.push_back(parse_int(part));
            if (c.horizons.empty()) throw ConfigError("empty horizon list");
        } else throw ConfigError("unknown [evaluate] key '" + key + "'");
        return;
    }
    if (section == "output") {
        if (key == "dir") c.out_dir = value;
        else throw ConfigError("unknown [output] key '" + key + "'");
        return;
    }
    if (section == "run") {
        if (key == "threads") c.threads = parse_int(value);
        else if (key == "seed") c.synth.seed = static_cast<std::uint64_t>(std::stoull(value));
        else throw ConfigError("unknown [run] key '" + key + "'");
        return;
    }
    if (section == "synth") {
        if (key == "months") c.synth.months = parse_int(value);
        else if (key == "components") c.synth.components = parse_int(value);
        else if (key == "planted") c.synth.planted = parse_int(value);
        else if (key == "snr") c.synth.snr = parse_num(value);
        else if (key == "spike_prob") c.synth.spike_prob = parse_num(value);
        else if (key == "spike_scale") c.synth.spike_scale = parse_num(value);
        else if (key == "rho") c.synth.rho = parse_num(value);
        else if (key == "zero_noise") c.synth.zero_noise = parse_bool(value);
        else if (key == "mode") {
            if (value == "comps") c.synth.mode = SynthSpec::Mode::Comps;
            else if (value == "ranks") c.synth.mode = SynthSpec::Mode::Ranks;
            else throw ConfigError("synth mode must be comps or ranks");
        } else throw ConfigError("unknown [synth] key '" + key + "'");
        return;
    }
    throw ConfigError("unknown config section '" + section + "'");
}

RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    for (const auto& [section, kv] : parse_ini(path))
        for (const auto& [key, value] : kv) apply_override(c, section + "." + key, value);
    return c;
}

void RunConfig::validate_for_data() const {
    auto check = [](const std::string& path, const char* what) {
        if (path.empty()) throw ConfigError(std::string("missing required data path: ") + what);
        std::ifstream probe(path);
        if (!probe) throw ConfigError(std::string("cannot open ") + what + " file '" + path + "'");
    };
    check(components_csv, "components");
    check(headline_csv, "headline");
    check(weights_csv, "weights");
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    out << "[data]\n";
    out << "components = " << c.components_csv << "\n";
    out << "headline = " << c.headline_csv << "\n";
    out << "weights = " << c.weights_csv << "\n";
    out << "grouping = " << c.grouping_csv << "\n";
    out << "benchmarks = " << c.benchmarks_csv << "\n";
    out << "\n[model]\n";
    out << "variant = " << variant_name(c.spec.variant) << "\n";
    out << "horizon = " << c.spec.horizon << "\n";
    out << "growth = " << growth_kind_name(c.spec.growth) << "\n";
    out << "lambda = "
        << (c.spec.lambda.mode == LambdaChoice::Mode::Fixed ? num(c.spec.lambda.value) : "cv")
        << "\n";
    out << "tau = " << num(c.spec.tau) << "\n";
    out << "lags = " << c.spec.lags << "\n";
    out << "constrained = " << (c.spec.constrained ? "true" : "false") << "\n";
    out << "with_intercept = " << (c.spec.with_intercept ? "true" : "false") << "\n";
    out << "smooth_window = " << c.spec.smooth_window << "\n";
    out << "\n[cv]\n";
    out << "folds = " << c.spec.cv_folds << "\n";
    out << "\n[window]\n";
    out << "scheme = " << c.window.str() << "\n";
    out << "\n[evaluate]\n";
    out << "test_ranges = ";
    for (size_t i = 0; i < c.test_ranges.size(); ++i)
        out << (i ? "," : "") << c.test_ranges[i].first.str() << ":" << c.test_ranges[i].second.str();
    out << "\n";
    out << "numeraire = " << c.numeraire << "\n";
    out << "retune_every = " << c.retune_every << "\n";
    out << "horizons = ";
    for (size_t i = 0; i < c.horizons.size(); ++i) out << (i ? "," : "") << c.horizons[i];
    out << "\n";
    out << "\n[output]\n";
    out << "dir = " << c.out_dir << "\n";
    out << "\n[run]\n";
    out << "threads = " << c.threads << "\n";
    out << "seed = " << c.synth.seed << "\n";
    out << "\n[synth]\n";
    out << "months = " << c.synth.months << "\n";
    out << "components = " << c.synth.components << "\n";
    out << "planted = " << c.synth.planted << "\n";
    out << "snr = " << num(c.synth.snr) << "\n";
    out << "spike_prob = " << num(c.synth.spike_prob) << "\n";
    out << "spike_scale = " << num(c.synth.spike_scale) << "\n";
    out << "rho = " << num(c.synth.rho) << "\n";
    out << "zero_noise = " << (c.synth.zero_noise ? "true" : "false") << "\n";
    out << "mode = " << (c.synth.mode == SynthSpec::Mode::Comps ? "comps" : "ranks") << "\n";
    return out.str();
}

}  // namespace assemblage
