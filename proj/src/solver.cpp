#include "assemblage/solver.hpp"

#include <cmath>

#include "qp_internal.hpp"

namespace assemblage {

using Eigen::Index;

namespace {

// Tie-break floor: a vanishing ridge on the problem's own penalty shape so
// flat optima resolve deterministically (and collinear unpenalized designs
// stay solvable).
constexpr double kTieBreakFloor = 1e-10;

// Gradient of lambda * penalty(w), computed difference-first so the result
// stays accurate when lambda is huge and w has converged onto the center.
Vector penalty_gradient(const PenaltySpec& penalty, double lambda, const Vector& w) {
    const Index k = w.size();
    Vector g(k);
    if (penalty.kind == PenaltyKind::CenteredRidge) {
        g = 2.0 * lambda * (w - penalty.center);
    } else {
        g.setZero();
        for (Index i = 0; i + 1 < k; ++i) {
            const double d = w[i + 1] - w[i];
            g[i] -= 2.0 * lambda * d;
            g[i + 1] += 2.0 * lambda * d;
        }
    }
    return g;
}

double penalty_value(const PenaltySpec& penalty, const Vector& w) {
    if (penalty.kind == PenaltyKind::CenteredRidge) return (w - penalty.center).squaredNorm();
    double s = 0.0;
    for (Index i = 0; i + 1 < w.size(); ++i) {
        const double d = w[i + 1] - w[i];
        s += d * d;
    }
    return s;
}

struct Assembled {
    detail::QpProblem qp;
    Matrix full_design;  // T x n, regressors plus intercept column when enabled
    Index k = 0;
    bool intercept = false;
    double lam_eff = 0.0;
};

Assembled assemble_squared(const PenalizedProblem& pb) {
    const Index k = pb.num_components();
    const Index t = pb.design.rows();
    const bool ic = pb.constraints.include_intercept;
    const Index n = k + (ic ? 1 : 0);
    const double lam = pb.lambda + kTieBreakFloor;

    Assembled out;
    out.k = k;
    out.intercept = ic;
    out.full_design.resize(t, n);
    out.full_design.leftCols(k) = pb.design;
    if (ic) out.full_design.col(k).setOnes();

    Matrix pen = Matrix::Zero(n, n);
    if (pb.penalty.kind == PenaltyKind::CenteredRidge) {
        pen.topLeftCorner(k, k) = Matrix::Identity(k, k);
    } else {
        const Matrix d = detail::difference_operator(k);
        pen.topLeftCorner(k, k) = d.transpose() * d;
    }

    out.qp.Q = 2.0 * (out.full_design.transpose() * out.full_design + lam * pen);
    out.qp.q = -2.0 * (out.full_design.transpose() * pb.response);
    if (pb.penalty.kind == PenaltyKind::CenteredRidge)
        out.qp.q.head(k) -= 2.0 * lam * pb.penalty.center;

    const Index m = static_cast<Index>(pb.constraints.equalities.size());
    out.qp.A = Matrix::Zero(m, n);
    out.qp.b = Vector::Zero(m);
    for (Index j = 0; j < m; ++j) {
        out.qp.A.row(j).head(k) = pb.constraints.equalities[static_cast<size_t>(j)].coeffs;
        out.qp.b[j] = pb.constraints.equalities[static_cast<size_t>(j)].rhs;
    }
    out.qp.bounded.assign(static_cast<size_t>(n), 0);
    if (pb.constraints.nonnegative)
        for (Index i = 0; i < k; ++i) out.qp.bounded[static_cast<size_t>(i)] = 1;
    out.lam_eff = lam;
    return out;
}

// Bind the cancellation-free gradient once `as` has its final address.
void attach_gradient(Assembled& as, const PenalizedProblem& pb) {
    const Matrix* design = &as.full_design;
    const Vector* y = &pb.response;
    const PenaltySpec* penalty = &pb.penalty;
    const double lam = as.lam_eff;
    const Index k = as.k;
    as.qp.gradient = [design, y, penalty, lam, k](const Vector& z) -> Vector {
        Vector g = -2.0 * (design->transpose() * (*y - *design * z));
        g.head(k) += penalty_gradient(*penalty, lam, z.head(k));
        return g;
    };
}

Vector initial_point(const PenalizedProblem& pb, const Assembled& as, const WeightSolution* warm) {
    const Index k = as.k;
    const Index n = as.qp.Q.rows();
    const Index m = as.qp.A.rows();

    Vector seed = Vector::Zero(n);
    bool have_seed = false;
    if (warm && warm->weights.size() == k) {
        seed.head(k) = warm->weights;
        if (as.intercept) seed[k] = warm->intercept.value_or(0.0);
        have_seed = true;
    } else if (pb.penalty.kind == PenaltyKind::CenteredRidge) {
        seed.head(k) = pb.penalty.center;
        have_seed = true;
    }
    if (pb.constraints.nonnegative)
        for (Index i = 0; i < k; ++i) seed[i] = std::max(seed[i], 0.0);

    if (m == 0) return seed;

    if (have_seed) {
        const double resid = (as.qp.A * seed - as.qp.b).cwiseAbs().maxCoeff();
        if (resid <= 1e-9 * (1.0 + as.qp.b.cwiseAbs().maxCoeff())) return seed;
    }
    return detail::feasible_start(as.qp.A, as.qp.b, as.qp.bounded, have_seed ? &seed : nullptr);
}

WeightSolution finish_solution(const PenalizedProblem& pb, const Assembled& as,
                               const detail::QpResult& qr) {
    WeightSolution sol;
    sol.weights = qr.z.head(as.k);
    if (as.intercept) sol.intercept = qr.z[as.k];
    sol.objective = objective_value(pb, sol.weights, sol.intercept.value_or(0.0));
    sol.iterations = qr.iterations;
    sol.converged = qr.converged;
    sol.eq_duals = qr.eq_duals;
    sol.bound_duals = qr.bound_duals.head(as.k);
    const KktDiagnostics kkt = kkt_report(sol, pb);
    sol.kkt_stationarity = kkt.stationarity;
    sol.kkt_feasibility = kkt.primal_feasibility;
    return sol;
}

}  // namespace

void PenalizedProblem::validate() const {
    const Index k = design.cols();
    if (design.rows() != response.size())
        throw ShapeMismatch("design has " + std::to_string(design.rows()) + " rows but response has " +
                            std::to_string(response.size()));
    if (design.rows() < 1) throw InvalidInput("empty estimation sample");
    if (!design.allFinite() || !response.allFinite())
        throw InvalidInput("design/response contain non-finite values");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and >= 0");
    if (loss.kind == LossKind::Pinball && !(loss.tau > 0.0 && loss.tau < 1.0))
        throw InvalidInput("pinball tau must lie strictly inside (0,1)");
    if (penalty.kind == PenaltyKind::CenteredRidge) {
        if (penalty.center.size() != k)
            throw ShapeMismatch("penalty center length " + std::to_string(penalty.center.size()) +
                                " != K = " + std::to_string(k));
        if (!penalty.center.allFinite()) throw InvalidInput("penalty center has non-finite entries");
    }
    for (const auto& eq : constraints.equalities) {
        if (eq.coeffs.size() != k)
            throw ShapeMismatch("equality coefficient length " + std::to_string(eq.coeffs.size()) +
                                " != K = " + std::to_string(k));
        if (!eq.coeffs.allFinite() || !std::isfinite(eq.rhs))
            throw InvalidInput("equality constraint has non-finite entries");
    }
}

double objective_value(const PenalizedProblem& problem, const Vector& weights, double intercept) {
    if (weights.size() != problem.num_components())
        throw ShapeMismatch("weight vector length does not match the design");
    const Vector resid = problem.response - problem.design * weights -
                         Vector::Constant(problem.response.size(), intercept);
    double data = 0.0;
    if (problem.loss.kind == LossKind::Squared) {
        data = resid.squaredNorm();
    } else {
        for (Index t = 0; t < resid.size(); ++t) data += pinball(problem.loss.tau, resid[t]);
    }
    return data + problem.lambda * penalty_value(problem.penalty, weights);
}

Vector objective_gradient(const PenalizedProblem& problem, const Vector& weights, double intercept) {
    if (weights.size() != problem.num_components())
        throw ShapeMismatch("weight vector length does not match the design");
    const Index k = weights.size();
    const bool ic = problem.constraints.include_intercept;
    const Vector resid = problem.response - problem.design * weights -
                         Vector::Constant(problem.response.size(), intercept);
    Vector g = Vector::Zero(k + (ic ? 1 : 0));
    if (problem.loss.kind == LossKind::Squared) {
        g.head(k) = -2.0 * (problem.design.transpose() * resid);
        if (ic) g[k] = -2.0 * resid.sum();
    } else {
        for (Index t = 0; t < resid.size(); ++t) {
            const double s = resid[t] > 0.0 ? problem.loss.tau : problem.loss.tau - 1.0;
            g.head(k) -= s * problem.design.row(t).transpose();
            if (ic) g[k] -= s;
        }
    }
    g.head(k) += penalty_gradient(problem.penalty, problem.lambda, weights);
    return g;
}

WeightSolution solve_penalized_ls(const PenalizedProblem& problem) { return solve(problem, nullptr); }

WeightSolution solve(const PenalizedProblem& problem) { return solve(problem, nullptr); }

WeightSolution solve(const PenalizedProblem& problem, const WeightSolution* warm) {
    problem.validate();
    if (problem.loss.kind == LossKind::Pinball) return solve_penalized_quantile(problem);

    Assembled as = assemble_squared(problem);
    attach_gradient(as, problem);
    Vector z0 = initial_point(problem, as, warm);
    detail::QpResult qr = detail::solve_qp_active_set(as.qp, std::move(z0), 100000);
    if (!qr.converged) {
        WeightSolution partial = finish_solution(problem, as, qr);
        throw NotConverged("active-set solver hit the iteration cap (stationarity " +
                               std::to_string(partial.kkt_stationarity) + ", feasibility " +
                               std::to_string(partial.kkt_feasibility) + ")",
                           partial.kkt_stationarity, partial.kkt_feasibility, qr.iterations);
    }
    return finish_solution(problem, as, qr);
}

}  // namespace assemblage
