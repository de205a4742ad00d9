#include "assemblage/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "assemblage/parallel.hpp"

namespace assemblage {

using Eigen::Index;

FoldPlan blocked_folds(int t_eff, int folds) {
    if (folds < 1) throw InvalidInput("fold count must be positive");
    if (t_eff < folds)
        throw TooFewObservations("cannot split " + std::to_string(t_eff) + " observations into " +
                                 std::to_string(folds) + " blocks");
    FoldPlan plan;
    plan.total = t_eff;
    const int base = t_eff / folds;
    const int remainder = t_eff % folds;
    int cursor = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = base + (f < remainder ? 1 : 0);
        plan.blocks.push_back({cursor, cursor + size - 1});
        cursor += size;
    }
    return plan;
}

Vector default_lambda_grid(const Matrix& design, int points) {
    if (points < 1) throw InvalidInput("grid needs at least one point");
    const double scale =
        design.cols() > 0 ? (design.transpose() * design).trace() / static_cast<double>(design.cols())
                          : 1.0;
    const double s = std::max(scale, 1e-12);
    Vector grid(points);
    if (points == 1) {
        grid[0] = s;
        return grid;
    }
    for (int i = 0; i < points; ++i) {
        const double expo = -4.0 + 8.0 * static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = s * std::pow(10.0, expo);
    }
    return grid;
}

namespace {

double score_block(const PenalizedProblem& problem, const WeightSolution& sol, const Matrix& design,
                   const Vector& response, const FoldPlan::Block& block, const LossSpec& loss) {
    double acc = 0.0;
    const double intercept = sol.intercept.value_or(0.0);
    for (int r = block.first; r <= block.last; ++r) {
        const double pred = design.row(r).dot(sol.weights) + intercept;
        const double err = response[r] - pred;
        acc += loss.kind == LossKind::Squared ? err * err : pinball(loss.tau, err);
    }
    (void)problem;
    return acc / static_cast<double>(block.last - block.first + 1);
}

}  // namespace

CvReport cross_validate(const ProblemBuilder& builder, const Matrix& design, const Vector& response,
                        const Vector& grid, const FoldPlan& plan, const LossSpec& loss,
                        int threads) {
    if (grid.size() == 0) throw InvalidInput("empty lambda grid");
    for (Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] >= grid[i - 1])) throw InvalidInput("lambda grid must be sorted ascending");
    if (design.rows() != response.size()) throw ShapeMismatch("design/response length mismatch");
    if (design.rows() != plan.total) throw ShapeMismatch("fold plan built for a different sample size");

    const int folds = static_cast<int>(plan.blocks.size());
    const Index n_lambda = grid.size();

    CvReport report;
    report.grid = grid;
    report.fold_scores = Matrix::Constant(folds, n_lambda, std::numeric_limits<double>::infinity());
    std::vector<std::vector<CvWarning>> fold_warnings(static_cast<size_t>(folds));

    parallel_for(folds, threads, [&](int f) {
        const FoldPlan::Block& block = plan.blocks[static_cast<size_t>(f)];
        std::vector<int> train_rows;
        train_rows.reserve(static_cast<size_t>(plan.total));
        for (int r = 0; r < plan.total; ++r)
            if (r < block.first || r > block.last) train_rows.push_back(r);

        // Sweep lambda from the most regularized end down, warm-starting each
        // solve from the previous one.
        WeightSolution warm;
        bool have_warm = false;
        for (Index li = n_lambda - 1; li >= 0; --li) {
            try {
                const PenalizedProblem sub = builder(train_rows, grid[li]);
                const WeightSolution sol = solve(sub, have_warm ? &warm : nullptr);
                report.fold_scores(f, li) = score_block(sub, sol, design, response, block, loss);
                warm = sol;
                have_warm = true;
            } catch (const Error& e) {
                fold_warnings[static_cast<size_t>(f)].push_back({f, grid[li], e.what()});
            }
        }
    });

    for (auto& w : fold_warnings)
        report.warnings.insert(report.warnings.end(), w.begin(), w.end());

    report.mean_scores = report.fold_scores.colwise().mean();
    report.chosen_index = 0;
    for (Index li = 0; li < n_lambda; ++li)
        if (report.mean_scores[li] <= report.mean_scores[report.chosen_index])
            report.chosen_index = static_cast<int>(li);  // ties go to the larger lambda
    report.chosen_lambda = grid[report.chosen_index];
    if (!std::isfinite(report.mean_scores[report.chosen_index]))
        throw NotConverged("cross-validation failed on every fold for every lambda", 0.0, 0.0, 0);
    return report;
}

}  // namespace assemblage
