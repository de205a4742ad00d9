#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "assemblage/errors.hpp"

namespace assemblage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class LossKind { Squared, Pinball };

struct LossSpec {
    LossKind kind = LossKind::Squared;
    double tau = 0.5;  // only meaningful for Pinball, strictly inside (0,1)

    static LossSpec squared() { return {LossKind::Squared, 0.5}; }
    static LossSpec pinball(double tau) { return {LossKind::Pinball, tau}; }
};

/// Pinball (quantile) loss rho_tau(u) = (tau - 1{u <= 0}) * u.
inline double pinball(double tau, double u) { return (u > 0.0 ? tau : tau - 1.0) * u; }

enum class PenaltyKind { CenteredRidge, FusedRidge };

/// Quadratic penalty, always in sum-of-squares form:
///   CenteredRidge: sum_k (w_k - c_k)^2, shrinking toward a reference basket.
///   FusedRidge:    sum_r (w_r - w_{r-1})^2, favoring smooth weight profiles
///                  across adjacent coordinates (ranks).
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::CenteredRidge;
    Vector center;  // length K for CenteredRidge; ignored for FusedRidge

    static PenaltySpec centered_ridge(Vector c) {
        PenaltySpec p;
        p.kind = PenaltyKind::CenteredRidge;
        p.center = std::move(c);
        return p;
    }
    static PenaltySpec fused_ridge() {
        PenaltySpec p;
        p.kind = PenaltyKind::FusedRidge;
        return p;
    }
};

struct LinearEquality {
    Vector coeffs;  // length K, applies to the weights only (never the intercept)
    double rhs = 0.0;
};

struct ConstraintSet {
    bool nonnegative = true;
    std::vector<LinearEquality> equalities;
    bool include_intercept = false;  // intercept is unpenalized and free in sign
};

/// One constrained penalized regression instance:
///   minimize  sum_t loss(y_t - w'x_t - w0) + lambda * penalty(w)
///   subject to  w >= 0 (optional)  and  a_j'w = b_j.
struct PenalizedProblem {
    Matrix design;    // T_eff x K
    Vector response;  // T_eff
    LossSpec loss;
    PenaltySpec penalty;
    ConstraintSet constraints;
    double lambda = 0.0;

    Eigen::Index num_components() const { return design.cols(); }
    void validate() const;  // throws ShapeMismatch / InvalidInput
};

struct WeightSolution {
    Vector weights;  // length K
    std::optional<double> intercept;

    double objective = 0.0;         // data fit + lambda * penalty (tie-break floor excluded)
    double kkt_stationarity = 0.0;  // max-norm stationarity residual
    double kkt_feasibility = 0.0;   // max bound/equality violation
    int iterations = 0;
    bool converged = false;

    // Lagrange multipliers, used by kkt_report when available.
    Vector eq_duals;     // one per equality
    Vector bound_duals;  // length K, zero where the bound is inactive/absent
};

struct KktDiagnostics {
    double stationarity = 0.0;
    double primal_feasibility = 0.0;  // max of bound and equality violations
    double complementary_slackness = 0.0;
};

/// Exact global minimizer of the squared-loss problem (active-set QP).
/// Stationarity tolerance 1e-8; see solve_options for warm starts.
WeightSolution solve_penalized_ls(const PenalizedProblem& problem);

/// Minimizer of the pinball-loss problem (primal-dual interior point).
/// Objective value is unique; among flat optima the returned point is the
/// one favored by a 1e-10 ridge floor on the problem's own penalty.
WeightSolution solve_penalized_quantile(const PenalizedProblem& problem);

/// Dispatch on problem.loss.kind.
WeightSolution solve(const PenalizedProblem& problem);

/// Warm-started variant: `warm` supplies a candidate weight vector (same
/// shape); it is used when feasible and otherwise only seeds phase 1.
WeightSolution solve(const PenalizedProblem& problem, const WeightSolution* warm);

/// Residuals of the first-order optimality conditions at an arbitrary
/// candidate solution. Uses the solution's own multipliers when present,
/// otherwise fits multipliers by bounded least squares. For Pinball the
/// subdifferential interval at zero residuals is honored.
KktDiagnostics kkt_report(const WeightSolution& solution, const PenalizedProblem& problem);

/// Exhaustive grid minimization over the feasible set, independent of the
/// main solver's code path. Requires K <= 3 and a feasible set of dimension
/// <= 2 after the equality constraints. One-dimensional sets are swept at
/// exactly `step`; two-dimensional sets are refined in stages down to
/// `step` (a full 2-D sweep at 1e-5 is not computable), which is safe for
/// these convex objectives. Squared-loss results get a final parabolic
/// refinement inside the winning cell (exact for quadratics).
WeightSolution brute_force_oracle(const PenalizedProblem& problem, double step);

/// Objective value sum_t loss(y_t - w'x_t - w0) + lambda * penalty(w).
double objective_value(const PenalizedProblem& problem, const Vector& weights,
                       double intercept = 0.0);

/// Gradient of the objective at (weights, intercept). For Pinball this is
/// the subgradient that assigns slope (tau - 1) at zero residuals.
Vector objective_gradient(const PenalizedProblem& problem, const Vector& weights,
                          double intercept = 0.0);

}  // namespace assemblage
