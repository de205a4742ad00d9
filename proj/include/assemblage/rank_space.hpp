#pragma once

#include "assemblage/transforms.hpp"

namespace assemblage {

/// Per-period order statistics of a growth panel with the allocation
/// permutations that recover component positions. Rank 1 (column 0) is the
/// smallest value; ties go to the lower component index.
struct OrderedPanel {
    std::vector<MonthDate> dates;
    Matrix order_stats;                 // T x K, each row nondecreasing
    Eigen::MatrixXi component_of_rank;  // T x K: component holding rank r at t
    int smooth_window = 1;              // 1 = raw sorted values

    Eigen::Index rows() const { return order_stats.rows(); }
    Eigen::Index ranks() const { return order_stats.cols(); }
};

/// Sort each period's cross-section, recording the permutation.
OrderedPanel to_order_statistics(const GrowthPanel& panel);
OrderedPanel to_order_statistics(const std::vector<MonthDate>& dates, const Matrix& rates);

/// Trailing moving average of each rank's time series; the first window-1
/// periods are dropped. Permutation rows kept are those of the trailing
/// month. Input must be an unsmoothed panel.
OrderedPanel smooth_order_stats(const OrderedPanel& ordered, int window = 3);

/// Time-varying component weights implied by fixed rank weights:
/// out(t, k) = rank_weights[rank of component k at t].
Matrix rank_to_component_weights(const Vector& rank_weights, const OrderedPanel& ordered);

/// Time-varying rank weights implied by fixed component weights:
/// out(t, r) = component_weights[component at rank r at t].
Matrix component_to_rank_weights(const Vector& component_weights, const OrderedPanel& ordered);

}  // namespace assemblage
