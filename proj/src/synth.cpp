#include "assemblage/synth.hpp"

#include <cmath>
#include <unordered_map>

namespace assemblage {

using Eigen::Index;

namespace {

// Self-contained RNG (splitmix64 + Box-Muller) so generated datasets are
// bit-identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    double uniform() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
    if (spec.months < 36) throw InvalidInput("synthetic panels need at least 36 months");
    if (spec.components < 2) throw InvalidInput("need at least 2 components");
    if (spec.planted < 1 || spec.planted > spec.components)
        throw InvalidInput("planted component count out of range");
    if (!(spec.rho > 0.0 && spec.rho < 1.0)) throw InvalidInput("rho must lie in (0,1)");
    if (!(spec.snr > 0.0)) throw InvalidInput("snr must be positive");

    Rng rng(spec.seed);
    const int t_rates = spec.months - 1;  // one monthly rate per level step
    const int k = spec.components;

    const double sigma_f = spec.zero_noise ? 0.0 : 0.6;
    const double var_f = spec.zero_noise
                             ? 1.0
                             : sigma_f * sigma_f / (1.0 - spec.rho * spec.rho);
    const double sigma_e = spec.zero_noise ? 0.0 : std::sqrt(var_f / spec.snr);

    Vector factor(t_rates);
    double f = 1.0;  // a nonzero start keeps the zero-noise path alive
    for (int t = 0; t < t_rates; ++t) {
        f = spec.rho * f + sigma_f * (spec.zero_noise ? 0.0 : rng.normal());
        factor[t] = f;
    }

    Matrix rates(t_rates, k);
    const double base_rate = 2.0;  // common level, annualized percent
    if (spec.mode == SynthSpec::Mode::Comps) {
        for (int t = 0; t < t_rates; ++t) {
            for (int c = 0; c < k; ++c) {
                const double load = c < spec.planted ? 1.0 : 0.0;
                const double idio =
                    spec.zero_noise ? 0.0 : (load > 0.0 ? sigma_e : std::sqrt(var_f)) * rng.normal();
                rates(t, c) = base_rate + load * factor[t] + idio;
            }
        }
    } else {
        for (int t = 0; t < t_rates; ++t) {
            for (int c = 0; c < k; ++c) {
                double x = base_rate + factor[t];
                if (!spec.zero_noise) {
                    x += sigma_e * rng.normal();
                    if (rng.uniform() < spec.spike_prob)
                        x -= spec.spike_scale * std::max(sigma_e, 0.3) * std::abs(rng.normal());
                }
                rates(t, c) = x;
            }
        }
    }

    // Headline: official weights aggregate the components. In Comps mode
    // the forward-looking content enters through the planted components.
    Vector headline_weights = Vector::Constant(k, 1.0 / k);
    Vector oracle_weights = Vector::Zero(k);
    if (spec.mode == SynthSpec::Mode::Comps) {
        for (int c = 0; c < spec.planted; ++c) oracle_weights[c] = 1.0 / spec.planted;
    } else {
        oracle_weights = headline_weights;
    }

    Vector headline_rates(t_rates);
    for (int t = 0; t < t_rates; ++t) {
        double r;
        if (spec.mode == SynthSpec::Mode::Comps) {
            r = oracle_weights.dot(rates.row(t).transpose());
            if (!spec.zero_noise) r += 0.2 * rng.normal();
        } else {
            r = headline_weights.dot(rates.row(t).transpose());
        }
        headline_rates[t] = r;
    }

    SynthData data;
    data.spec = spec;
    data.factor = factor;
    data.rates = rates;
    data.headline_rates = headline_rates;
    data.oracle_weights = oracle_weights;

    // Integrate rates (annualized percent) into index levels.
    PriceIndexPanel& panel = data.panel;
    panel.dates = month_range(MonthDate{2000, 1}, MonthDate{2000, 1}.plus(spec.months - 1));
    panel.levels.resize(spec.months, k);
    panel.headline_levels.resize(spec.months);
    panel.levels.row(0).setConstant(100.0);
    panel.headline_levels[0] = 100.0;
    for (int t = 1; t < spec.months; ++t) {
        for (int c = 0; c < k; ++c)
            panel.levels(t, c) = panel.levels(t - 1, c) * (1.0 + rates(t - 1, c) / 1200.0);
        panel.headline_levels[t] =
            panel.headline_levels[t - 1] * (1.0 + headline_rates[t - 1] / 1200.0);
    }
    panel.headline_weights = headline_weights;
    panel.labels.reserve(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
        const bool planted = spec.mode == SynthSpec::Mode::Comps ? c < spec.planted : false;
        panel.labels.push_back((planted ? "sig" : "cmp") + std::to_string(c + 1));
    }
    panel.validate();

    static const char* kGroups[4] = {"energy", "goods", "services", "other"};
    for (int c = 0; c < k; ++c)
        data.grouping.group_of[panel.labels[static_cast<size_t>(c)]] = kGroups[c % 4];
    return data;
}

Vector oracle_forward_mean(const SynthData& data, const std::vector<MonthDate>& origins, int h) {
    if (h < 1) throw InvalidInput("horizon must be >= 1");
    const SynthSpec& spec = data.spec;
    std::unordered_map<int, Index> rate_at;  // rate index t belongs to date t+1 in panel time
    for (size_t i = 0; i + 1 < data.panel.dates.size(); ++i)
        rate_at.emplace(data.panel.dates[i + 1].index(), static_cast<Index>(i));

    // E[r_{t+j} | f_t]: the common level plus rho^j * loading * f_t, plus
    // the unconditional spike drift in Ranks mode.
    double loading = 1.0;
    if (spec.mode == SynthSpec::Mode::Comps)
        loading = static_cast<double>(spec.planted) / spec.planted;  // planted average loads 1:1
    double drift = 2.0;
    if (spec.mode == SynthSpec::Mode::Ranks && !spec.zero_noise) {
        const double sigma_e = std::sqrt((0.36 / (1.0 - spec.rho * spec.rho)) / spec.snr);
        drift += -spec.spike_prob * spec.spike_scale * std::max(sigma_e, 0.3) *
                 std::sqrt(2.0 / 3.14159265358979323846);
    }
    double decay = 0.0;
    for (int j = 1; j <= h; ++j) decay += std::pow(spec.rho, j);
    decay /= h;

    Vector out(static_cast<Index>(origins.size()));
    for (size_t i = 0; i < origins.size(); ++i) {
        const auto it = rate_at.find(origins[i].index());
        if (it == rate_at.end()) throw InvalidInput("origin outside the generated sample");
        out[static_cast<Index>(i)] = drift + loading * decay * data.factor[it->second];
    }
    return out;
}

}  // namespace assemblage
