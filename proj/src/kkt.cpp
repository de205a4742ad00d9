#include <algorithm>
#include <cmath>
#include <vector>

#include "qp_internal.hpp"

namespace assemblage {

using Eigen::Index;

namespace {

// Stationarity residual given a concrete multiplier assignment. Columns of
// `basis` span A' directions, active-bound unit vectors and (for Pinball)
// the regressor rows with zero residual; `coef` holds the matching
// multipliers.
double stationarity_residual(const Vector& base_grad, const Matrix& basis, const Vector& coef) {
    if (basis.cols() == 0) return base_grad.size() ? base_grad.cwiseAbs().maxCoeff() : 0.0;
    return (base_grad - basis * coef).cwiseAbs().maxCoeff();
}

}  // namespace

KktDiagnostics kkt_report(const WeightSolution& solution, const PenalizedProblem& problem) {
    problem.validate();
    const Index k = problem.num_components();
    if (solution.weights.size() != k)
        throw ShapeMismatch("solution has " + std::to_string(solution.weights.size()) +
                            " weights for a K=" + std::to_string(k) + " problem");

    const Vector& w = solution.weights;
    const double intercept = solution.intercept.value_or(0.0);
    const bool ic = problem.constraints.include_intercept;
    const Index m = static_cast<Index>(problem.constraints.equalities.size());

    KktDiagnostics diag;

    // Primal feasibility: bound violations and equality gaps.
    if (problem.constraints.nonnegative && k > 0)
        diag.primal_feasibility = std::max(diag.primal_feasibility, std::max(0.0, -w.minCoeff()));
    for (const auto& eq : problem.constraints.equalities)
        diag.primal_feasibility = std::max(diag.primal_feasibility, std::abs(eq.coeffs.dot(w) - eq.rhs));

    // Base gradient: penalty plus the data term over rows with clearly
    // signed residuals. For Pinball, near-zero residual rows join the
    // multiplier search with slope bounded by the subdifferential.
    const Vector resid = problem.response - problem.design * w -
                         Vector::Constant(problem.response.size(), intercept);
    const double resid_tol = problem.loss.kind == LossKind::Pinball
                                 ? 1e-7 * (1.0 + problem.response.cwiseAbs().maxCoeff())
                                 : 0.0;
    std::vector<Index> kink_rows;
    const Index dim = k + (ic ? 1 : 0);
    Vector base_grad = objective_gradient(problem, w, intercept);
    if (problem.loss.kind == LossKind::Pinball) {
        for (Index t = 0; t < resid.size(); ++t) {
            if (std::abs(resid[t]) <= resid_tol) {
                kink_rows.push_back(t);
                // remove the one-sided slope objective_gradient committed to
                const double s = resid[t] > 0.0 ? problem.loss.tau : problem.loss.tau - 1.0;
                base_grad.head(k) += s * problem.design.row(t).transpose();
                if (ic) base_grad[k] += s;
            }
        }
    }

    // Active bound set.
    std::vector<Index> active_bounds;
    if (problem.constraints.nonnegative) {
        const double act_tol = 1e-7 * (1.0 + (k > 0 ? w.cwiseAbs().maxCoeff() : 0.0));
        for (Index i = 0; i < k; ++i)
            if (w[i] <= act_tol) active_bounds.push_back(i);
    }

    // Multiplier basis: [A' columns | active bound unit vectors | kink rows].
    const Index n_kink = static_cast<Index>(kink_rows.size());
    const Index n_act = static_cast<Index>(active_bounds.size());
    Matrix basis = Matrix::Zero(dim, m + n_act + n_kink);
    for (Index j = 0; j < m; ++j)
        basis.col(j).head(k) = problem.constraints.equalities[static_cast<size_t>(j)].coeffs;
    for (Index j = 0; j < n_act; ++j) basis(active_bounds[static_cast<size_t>(j)], m + j) = 1.0;
    for (Index j = 0; j < n_kink; ++j) {
        const Index t = kink_rows[static_cast<size_t>(j)];
        basis.col(m + n_act + j).head(k) = problem.design.row(t).transpose();
        if (ic) basis(k, m + n_act + j) = 1.0;
    }

    auto clamp_coef = [&](Vector& coef) {
        for (Index j = 0; j < n_act; ++j) coef[m + j] = std::max(0.0, coef[m + j]);
        for (Index j = 0; j < n_kink; ++j) {
            double& s = coef[m + n_act + j];
            s = std::clamp(s, problem.loss.tau - 1.0, problem.loss.tau);
        }
    };

    // Candidate 1: multipliers reported by the solver (bound duals plus a
    // refit of the remaining blocks around them).
    double best = base_grad.size() ? base_grad.cwiseAbs().maxCoeff() : 0.0;
    Vector best_coef = Vector::Zero(basis.cols());
    const bool have_duals = solution.eq_duals.size() == m && solution.bound_duals.size() == k;
    if (have_duals && basis.cols() > 0) {
        Vector coef = Vector::Zero(basis.cols());
        coef.head(m) = solution.eq_duals;
        for (Index j = 0; j < n_act; ++j)
            coef[m + j] = std::max(0.0, solution.bound_duals[active_bounds[static_cast<size_t>(j)]]);
        if (n_kink > 0) {
            // Fit the kink slopes with everything else frozen.
            Matrix kb = basis.rightCols(n_kink);
            Vector target = base_grad - basis.leftCols(m + n_act) * coef.head(m + n_act);
            coef.tail(n_kink) = kb.completeOrthogonalDecomposition().solve(target);
            clamp_coef(coef);
        }
        const double r = stationarity_residual(base_grad, basis, coef);
        if (r < best) {
            best = r;
            best_coef = coef;
        }
    }

    // Candidate 2: fresh projected least-squares fit of all multipliers,
    // alternating between the free equality block and the clamped blocks.
    if (basis.cols() > 0) {
        Vector coef = basis.completeOrthogonalDecomposition().solve(base_grad);
        clamp_coef(coef);
        const Index n_clamped = n_act + n_kink;
        for (int round = 0; round < 3; ++round) {
            if (m > 0) {
                Vector target = base_grad;
                if (n_clamped > 0) target -= basis.rightCols(n_clamped) * coef.tail(n_clamped);
                coef.head(m) = Matrix(basis.leftCols(m)).completeOrthogonalDecomposition().solve(target);
            }
            if (n_clamped > 0) {
                Vector target = base_grad;
                if (m > 0) target -= basis.leftCols(m) * coef.head(m);
                coef.tail(n_clamped) =
                    Matrix(basis.rightCols(n_clamped)).completeOrthogonalDecomposition().solve(target);
                clamp_coef(coef);
            }
        }
        const double r = stationarity_residual(base_grad, basis, coef);
        if (r < best) {
            best = r;
            best_coef = coef;
        }
    }

    diag.stationarity = best;

    // Complementary slackness for the bound multipliers actually used.
    double comp = 0.0;
    for (Index j = 0; j < n_act; ++j)
        comp = std::max(comp, std::abs(best_coef[m + j] * w[active_bounds[static_cast<size_t>(j)]]));
    // Bounds held by explicitly inactive multipliers contribute exactly zero.
    diag.complementary_slackness = comp;
    return diag;
}

}  // namespace assemblage
