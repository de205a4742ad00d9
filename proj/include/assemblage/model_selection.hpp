#pragma once

#include <functional>
#include <string>
#include <vector>

#include "assemblage/solver.hpp"

namespace assemblage {

/// Contiguous non-overlapping blocks partitioning 0..t_eff-1.
struct FoldPlan {
    struct Block {
        int first;  // inclusive
        int last;   // inclusive
    };
    std::vector<Block> blocks;
    int total = 0;
};

/// Block sizes differ by at most one; the remainder goes to the earliest
/// blocks.
FoldPlan blocked_folds(int t_eff, int folds = 10);

struct CvWarning {
    int fold;
    double lambda;
    std::string message;
};

struct CvReport {
    Vector grid;         // ascending lambda values
    Vector mean_scores;  // per lambda, averaged over folds
    Matrix fold_scores;  // folds x grid
    double chosen_lambda = 0.0;
    int chosen_index = -1;
    std::vector<CvWarning> warnings;
};

/// Builds the estimation problem for a training subset at a given lambda.
/// Equality constraints that depend on sample moments are expected to be
/// recomputed from the subset inside the builder.
using ProblemBuilder =
    std::function<PenalizedProblem(const std::vector<int>& train_rows, double lambda)>;

/// 20 log-spaced points from 1e-4*s to 1e4*s with s = trace(X'X)/K.
Vector default_lambda_grid(const Matrix& design, int points = 20);

/// Blocked cross-validation: for each lambda and fold, fit on the
/// complement and score the held-out block with the estimator's own loss
/// (MSE for Squared, mean pinball for Pinball). Ties break toward the
/// larger lambda. Solver failures score the lambda as +inf for that fold
/// and leave a warning record. Folds run in parallel; reduction order is
/// fixed, so reports are identical at any thread count.
CvReport cross_validate(const ProblemBuilder& builder, const Matrix& design, const Vector& response,
                        const Vector& grid, const FoldPlan& plan, const LossSpec& loss,
                        int threads = 1);

}  // namespace assemblage
