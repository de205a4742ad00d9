#pragma once

// Deterministic random-problem corpus shared by the solver unit tests and
// the acceptance suite. Keeps its own tiny RNG so results are identical
// across standard libraries.

#include <cmath>
#include <cstdint>

#include "assemblage/solver.hpp"

namespace testutil {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        // Box-Muller; cache the second draw.
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

    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Random squared-loss problem with K <= 3 and a feasible set of dimension
// <= 2, cycling through mixed constraint patterns.
inline assemblage::PenalizedProblem random_small_problem(std::uint64_t seed) {
    using namespace assemblage;
    Rng rng(seed * 0x51d2cc58cabb1377ULL + 17);
    const int pattern = static_cast<int>(seed % 8);

    PenalizedProblem pb;
    int k = 2;
    switch (pattern) {
        case 0: k = 2; break;
        case 1: k = 3; break;
        case 2: k = 2; break;
        case 3: k = 3; break;
        case 4: k = 2; break;
        case 5: k = 2; break;
        case 6: k = 1; break;
        default: k = 3; break;
    }
    const int t = rng.uniform_int(8, 30);
    pb.design.resize(t, k);
    for (int r = 0; r < t; ++r)
        for (int c = 0; c < k; ++c) pb.design(r, c) = 2.0 * rng.normal();

    Vector w_true(k);
    for (int c = 0; c < k; ++c) w_true[c] = rng.uniform();
    w_true /= w_true.sum();
    pb.response = pb.design * w_true;
    for (int r = 0; r < t; ++r) pb.response[r] += 0.3 * rng.normal();

    Vector center(k);
    for (int c = 0; c < k; ++c) center[c] = rng.uniform();
    center /= center.sum();

    const double lam_menu[3] = {0.0, 0.5, 10.0};
    pb.lambda = lam_menu[static_cast<int>(rng.next_u64() % 3)];
    pb.loss = LossSpec::squared();
    pb.penalty = PenaltySpec::centered_ridge(center);
    pb.constraints.nonnegative = true;

    auto sum_to_one = [&] {
        LinearEquality eq;
        eq.coeffs = Vector::Ones(k);
        eq.rhs = 1.0;
        pb.constraints.equalities.push_back(eq);
    };

    switch (pattern) {
        case 0:
            sum_to_one();
            break;
        case 1:
            sum_to_one();
            if (rng.uniform() < 0.5) pb.penalty = PenaltySpec::fused_ridge();
            break;
        case 2:  // 2-D box, bounds only
            pb.lambda = 0.5 + 2.0 * rng.uniform();
            break;
        case 3: {  // two equalities, dimension 1
            sum_to_one();
            LinearEquality eq;
            eq.coeffs.resize(k);
            for (int c = 0; c < k; ++c) eq.coeffs[c] = 0.2 + rng.uniform();
            Vector w_feas(k);
            for (int c = 0; c < k; ++c) w_feas[c] = 0.1 + rng.uniform();
            w_feas /= w_feas.sum();
            eq.rhs = eq.coeffs.dot(w_feas);
            pb.constraints.equalities.push_back(eq);
            break;
        }
        case 4: {  // mean-match style single equality, fused penalty
            pb.penalty = PenaltySpec::fused_ridge();
            LinearEquality eq;
            eq.coeffs.resize(k);
            for (int c = 0; c < k; ++c) eq.coeffs[c] = 0.2 + rng.uniform();
            eq.rhs = 0.5 + rng.uniform();
            pb.constraints.equalities.push_back(eq);
            break;
        }
        case 5:  // free-sign coefficients, coercive ridge
            pb.constraints.nonnegative = false;
            pb.lambda = 0.5 + 2.0 * rng.uniform();
            break;
        case 6:
            sum_to_one();
            break;
        default:
            sum_to_one();
            if (rng.uniform() < 0.5) pb.penalty = PenaltySpec::fused_ridge();
            pb.lambda = 0.5;
            break;
    }
    return pb;
}

}  // namespace testutil
