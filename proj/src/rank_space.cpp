#include "assemblage/rank_space.hpp"

#include <algorithm>
#include <numeric>

namespace assemblage {

using Eigen::Index;

OrderedPanel to_order_statistics(const std::vector<MonthDate>& dates, const Matrix& rates) {
    const Index t = rates.rows();
    const Index k = rates.cols();
    if (static_cast<Index>(dates.size()) != t) throw ShapeMismatch("dates/rates length mismatch");
    if (!rates.allFinite()) throw InvalidInput("rates contain non-finite values");

    OrderedPanel out;
    out.dates = dates;
    out.order_stats.resize(t, k);
    out.component_of_rank.resize(t, k);
    std::vector<int> perm(static_cast<size_t>(k));
    for (Index row = 0; row < t; ++row) {
        std::iota(perm.begin(), perm.end(), 0);
        std::stable_sort(perm.begin(), perm.end(),
                         [&](int a, int b) { return rates(row, a) < rates(row, b); });
        for (Index r = 0; r < k; ++r) {
            out.component_of_rank(row, r) = perm[static_cast<size_t>(r)];
            out.order_stats(row, r) = rates(row, perm[static_cast<size_t>(r)]);
        }
    }
    return out;
}

OrderedPanel to_order_statistics(const GrowthPanel& panel) {
    return to_order_statistics(panel.dates, panel.rates);
}

OrderedPanel smooth_order_stats(const OrderedPanel& ordered, int window) {
    if (window < 1) throw InvalidInput("smoothing window must be >= 1");
    if (ordered.smooth_window != 1) throw InvalidInput("panel is already smoothed");
    if (window == 1) return ordered;
    const Index t = ordered.rows();
    const Index k = ordered.ranks();
    if (t < window)
        throw InsufficientHistory("smoothing window " + std::to_string(window) +
                                  " exceeds the sample of " + std::to_string(t));

    OrderedPanel out;
    out.smooth_window = window;
    out.order_stats.resize(t - window + 1, k);
    out.component_of_rank.resize(t - window + 1, k);
    for (Index row = window - 1; row < t; ++row) {
        out.order_stats.row(row - window + 1) =
            ordered.order_stats.middleRows(row - window + 1, window).colwise().mean();
        out.component_of_rank.row(row - window + 1) = ordered.component_of_rank.row(row);
    }
    out.dates.assign(ordered.dates.begin() + (window - 1), ordered.dates.end());
    return out;
}

Matrix rank_to_component_weights(const Vector& rank_weights, const OrderedPanel& ordered) {
    const Index t = ordered.rows();
    const Index k = ordered.ranks();
    if (rank_weights.size() != k)
        throw ShapeMismatch("rank weight vector length " + std::to_string(rank_weights.size()) +
                            " != K = " + std::to_string(k));
    Matrix out = Matrix::Zero(t, k);
    for (Index row = 0; row < t; ++row)
        for (Index r = 0; r < k; ++r) out(row, ordered.component_of_rank(row, r)) = rank_weights[r];
    return out;
}

Matrix component_to_rank_weights(const Vector& component_weights, const OrderedPanel& ordered) {
    const Index t = ordered.rows();
    const Index k = ordered.ranks();
    if (component_weights.size() != k)
        throw ShapeMismatch("component weight vector length " +
                            std::to_string(component_weights.size()) + " != K = " + std::to_string(k));
    Matrix out = Matrix::Zero(t, k);
    for (Index row = 0; row < t; ++row)
        for (Index r = 0; r < k; ++r) out(row, r) = component_weights[ordered.component_of_rank(row, r)];
    return out;
}

}  // namespace assemblage
