#pragma once

#include <cstdint>

#include "assemblage/evaluation.hpp"
#include "assemblage/transforms.hpp"

namespace assemblage {

/// Synthetic panel generator with a planted forward-looking structure.
///
/// A persistent AR(1) factor drives future headline inflation. In Comps
/// mode only the planted components load on the factor, so a supervised
/// weighting should concentrate mass on them. In Ranks mode every
/// component tracks the factor but is hit by transitory negative spikes;
/// the clean signal lives in the upper-middle order statistics, which is
/// what a rank-space weighting can isolate (and what the equal-weight
/// aggregate dilutes).
struct SynthSpec {
    std::uint64_t seed = 42;
    int months = 300;
    int components = 12;
    int planted = 3;      // Comps mode: number of signal-bearing components
    double snr = 8.0;     // factor variance over idiosyncratic variance
    double spike_prob = 0.10;   // Ranks mode: per-component spike probability
    double spike_scale = 8.0;   // spike magnitude in idiosyncratic sd units
    double rho = 0.95;          // factor persistence
    bool zero_noise = false;    // deterministic factor decay, no noise at all
    enum class Mode { Comps, Ranks } mode = Mode::Ranks;
};

struct SynthData {
    PriceIndexPanel panel;
    GroupingMap grouping;
    Vector oracle_weights;  // the planted aggregation (component space)
    Vector factor;          // latent factor path (one per month)
    Matrix rates;           // component monthly rates as generated (T-1 x K)
    Vector headline_rates;  // headline monthly rates (T-1)
    SynthSpec spec;
};

SynthData generate_synthetic(const SynthSpec& spec);

/// Exact conditional mean of the forward h-month average of the headline
/// rate given the factor at each origin (the generator's own best
/// prediction; zero OOS error in zero-noise mode).
Vector oracle_forward_mean(const SynthData& data, const std::vector<MonthDate>& origins, int h);

}  // namespace assemblage
