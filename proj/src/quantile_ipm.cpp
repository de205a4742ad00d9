#include <algorithm>
#include <cmath>

#include "qp_internal.hpp"

namespace assemblage {

using Eigen::Index;

namespace {

constexpr double kTieBreakFloor = 1e-10;
constexpr int kMaxIpmIterations = 300;

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

// Largest alpha in (0,1] with v + alpha*dv >= (1-damp)*v, i.e. the usual
// fraction-to-the-boundary rule over the strictly positive entries.
double boundary_step(const Vector& v, const Vector& dv, const std::vector<char>* mask = nullptr) {
    double alpha = 1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (mask && !(*mask)[static_cast<size_t>(i)]) continue;
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    return alpha;
}

}  // namespace

WeightSolution solve_penalized_quantile(const PenalizedProblem& problem) {
    problem.validate();
    if (problem.loss.kind != LossKind::Pinball)
        throw InvalidInput("solve_penalized_quantile requires a Pinball loss");

    const Index k = problem.num_components();
    const Index t_rows = problem.design.rows();
    const bool ic = problem.constraints.include_intercept;
    const Index n = k + (ic ? 1 : 0);
    const Index m = static_cast<Index>(problem.constraints.equalities.size());
    const double tau = problem.loss.tau;
    const double lam = problem.lambda + kTieBreakFloor;

    Matrix design(t_rows, n);
    design.leftCols(k) = problem.design;
    if (ic) design.col(k).setOnes();
    const Vector& y = problem.response;

    Matrix eq = Matrix::Zero(m, n);
    Vector eq_rhs = Vector::Zero(m);
    for (Index j = 0; j < m; ++j) {
        eq.row(j).head(k) = problem.constraints.equalities[static_cast<size_t>(j)].coeffs;
        eq_rhs[j] = problem.constraints.equalities[static_cast<size_t>(j)].rhs;
    }
    std::vector<char> bounded(static_cast<size_t>(n), 0);
    if (problem.constraints.nonnegative)
        for (Index i = 0; i < k; ++i) bounded[static_cast<size_t>(i)] = 1;
    const bool any_bound = problem.constraints.nonnegative && k > 0;

    Matrix pen = Matrix::Zero(n, n);
    if (problem.penalty.kind == PenaltyKind::CenteredRidge) {
        pen.topLeftCorner(k, k) = Matrix::Identity(k, k);
    } else {
        const Matrix d = detail::difference_operator(k);
        pen.topLeftCorner(k, k) = d.transpose() * d;
    }
    const Matrix hess = 2.0 * lam * pen;
    // Exact Hz + g0, computed difference-first.
    auto hess_grad = [&](const Vector& z) -> Vector {
        Vector g = Vector::Zero(n);
        g.head(k) = penalty_gradient(problem.penalty, lam, z.head(k));
        return g;
    };

    // Starting point: feasible-ish weights pushed strictly inside the cone,
    // residual split with a positive margin, duals mid-interval.
    Vector z;
    if (m > 0) {
        z = detail::feasible_start(eq, eq_rhs, bounded, nullptr);
    } else if (problem.penalty.kind == PenaltyKind::CenteredRidge) {
        z = Vector::Zero(n);
        z.head(k) = problem.penalty.center;
    } else {
        z = Vector::Zero(n);
    }
    for (Index i = 0; i < n; ++i)
        if (bounded[static_cast<size_t>(i)]) z[i] = std::max(z[i], 0.1);

    Vector resid0 = y - design * z;
    const double margin = 0.1 * (1.0 + resid0.cwiseAbs().mean());
    Vector u_pos = resid0.cwiseMax(0.0).array() + margin;
    Vector u_neg = (-resid0).cwiseMax(0.0).array() + margin;
    Vector xi = Vector::Constant(t_rows, tau - 0.5);
    Vector s_pos = Vector::Constant(t_rows, tau) - xi;
    Vector s_neg = Vector::Constant(t_rows, 1.0 - tau) + xi;
    Vector mu = Vector::Zero(n);
    for (Index i = 0; i < n; ++i)
        if (bounded[static_cast<size_t>(i)]) mu[i] = 1.0;
    Vector nu = Vector::Zero(m);

    const double comp_dim = static_cast<double>(2 * t_rows) +
                            static_cast<double>(std::count(bounded.begin(), bounded.end(), 1));
    const double y_scale = 1.0 + y.cwiseAbs().maxCoeff();

    int iter = 0;
    bool converged = false;
    double gap = 0.0, primal_inf = 0.0, dual_inf = 0.0;
    for (; iter < kMaxIpmIterations; ++iter) {
        const Vector r_w = hess_grad(z) - design.transpose() * xi -
                           (m > 0 ? Vector(eq.transpose() * nu) : Vector::Zero(n)) - mu;
        const Vector r_up = Vector::Constant(t_rows, tau) - xi - s_pos;
        const Vector r_un = Vector::Constant(t_rows, 1.0 - tau) + xi - s_neg;
        const Vector r_p = design * z + u_pos - u_neg - y;
        const Vector r_a = m > 0 ? Vector(eq * z - eq_rhs) : Vector();

        gap = u_pos.dot(s_pos) + u_neg.dot(s_neg);
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)]) gap += z[i] * mu[i];
        const double mu_bar = gap / comp_dim;

        primal_inf = r_p.cwiseAbs().maxCoeff();
        if (m > 0) primal_inf = std::max(primal_inf, r_a.cwiseAbs().maxCoeff());
        const double dual_scale =
            1.0 + (design.transpose() * xi).cwiseAbs().maxCoeff() + mu.cwiseAbs().maxCoeff();
        dual_inf = r_w.cwiseAbs().maxCoeff();

        if (mu_bar <= 1e-12 * (1.0 + y_scale) && primal_inf <= 1e-10 * y_scale &&
            dual_inf <= 1e-9 * dual_scale) {
            converged = true;
            break;
        }

        const Vector d_pos = u_pos.cwiseQuotient(s_pos);
        const Vector d_neg = u_neg.cwiseQuotient(s_neg);
        const Vector dg = (d_pos + d_neg).cwiseInverse();

        Matrix big = hess + design.transpose() * dg.asDiagonal() * design;
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)]) big(i, i) += mu[i] / z[i];

        Eigen::LDLT<Matrix> big_ldlt(big);
        if (big_ldlt.info() != Eigen::Success) {
            Matrix jittered = big;
            jittered.diagonal().array() += 1e-12 * (1.0 + big.diagonal().cwiseAbs().maxCoeff());
            big_ldlt.compute(jittered);
        }
        Matrix big_inv_eqT;
        Eigen::LDLT<Matrix> schur_ldlt;
        if (m > 0) {
            big_inv_eqT = big_ldlt.solve(eq.transpose());
            Matrix schur = eq * big_inv_eqT;
            schur_ldlt.compute(schur);
        }

        // One Newton solve for given complementarity targets.
        auto newton = [&](const Vector& rc_pos, const Vector& rc_neg, const Vector& rc_bound,
                          Vector& dz, Vector& dxi, Vector& dnu, Vector& dmu, Vector& du_pos,
                          Vector& du_neg, Vector& ds_pos, Vector& ds_neg) {
            const Vector h = -r_p + rc_pos.cwiseQuotient(s_pos) + d_pos.cwiseProduct(r_up) -
                             rc_neg.cwiseQuotient(s_neg) - d_neg.cwiseProduct(r_un);
            Vector rhs_w = -r_w + design.transpose() * dg.cwiseProduct(h).matrix();
            for (Index i = 0; i < n; ++i)
                if (bounded[static_cast<size_t>(i)]) rhs_w[i] -= rc_bound[i] / z[i];

            if (m > 0) {
                const Vector big_inv_rhs = big_ldlt.solve(rhs_w);
                dnu = schur_ldlt.solve(-r_a - eq * big_inv_rhs);
                dz = big_inv_rhs + big_inv_eqT * dnu;
            } else {
                dnu = Vector();
                dz = big_ldlt.solve(rhs_w);
            }
            dxi = dg.cwiseProduct(h - design * dz);
            ds_pos = r_up - dxi;
            ds_neg = r_un + dxi;
            du_pos = (-rc_pos - u_pos.cwiseProduct(ds_pos)).cwiseQuotient(s_pos);
            du_neg = (-rc_neg - u_neg.cwiseProduct(ds_neg)).cwiseQuotient(s_neg);
            dmu = Vector::Zero(n);
            for (Index i = 0; i < n; ++i)
                if (bounded[static_cast<size_t>(i)]) dmu[i] = (-rc_bound[i] - mu[i] * dz[i]) / z[i];
        };

        Vector dz, dxi, dnu, dmu, du_pos, du_neg, ds_pos, ds_neg;

        // Predictor (affine scaling).
        Vector rc_pos = u_pos.cwiseProduct(s_pos);
        Vector rc_neg = u_neg.cwiseProduct(s_neg);
        Vector rc_bound = Vector::Zero(n);
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)]) rc_bound[i] = z[i] * mu[i];
        newton(rc_pos, rc_neg, rc_bound, dz, dxi, dnu, dmu, du_pos, du_neg, ds_pos, ds_neg);

        double alpha_p = std::min(boundary_step(u_pos, du_pos), boundary_step(u_neg, du_neg));
        if (any_bound) alpha_p = std::min(alpha_p, boundary_step(z, dz, &bounded));
        double alpha_d = std::min(boundary_step(s_pos, ds_pos), boundary_step(s_neg, ds_neg));
        if (any_bound) alpha_d = std::min(alpha_d, boundary_step(mu, dmu, &bounded));

        double gap_aff = (u_pos + alpha_p * du_pos).dot(s_pos + alpha_d * ds_pos) +
                         (u_neg + alpha_p * du_neg).dot(s_neg + alpha_d * ds_neg);
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)])
                gap_aff += (z[i] + alpha_p * dz[i]) * (mu[i] + alpha_d * dmu[i]);
        const double sigma =
            std::min(1.0, std::pow(std::max(gap_aff, 0.0) / std::max(gap, 1e-300), 3.0));

        // Corrector with centering.
        const double target = sigma * mu_bar;
        rc_pos += du_pos.cwiseProduct(ds_pos) - Vector::Constant(t_rows, target);
        rc_neg += du_neg.cwiseProduct(ds_neg) - Vector::Constant(t_rows, target);
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)]) rc_bound[i] += dz[i] * dmu[i] - target;
        newton(rc_pos, rc_neg, rc_bound, dz, dxi, dnu, dmu, du_pos, du_neg, ds_pos, ds_neg);

        alpha_p = std::min(boundary_step(u_pos, du_pos), boundary_step(u_neg, du_neg));
        if (any_bound) alpha_p = std::min(alpha_p, boundary_step(z, dz, &bounded));
        alpha_d = std::min(boundary_step(s_pos, ds_pos), boundary_step(s_neg, ds_neg));
        if (any_bound) alpha_d = std::min(alpha_d, boundary_step(mu, dmu, &bounded));
        alpha_p = std::min(1.0, 0.995 * alpha_p);
        alpha_d = std::min(1.0, 0.995 * alpha_d);

        z += alpha_p * dz;
        u_pos += alpha_p * du_pos;
        u_neg += alpha_p * du_neg;
        xi += alpha_d * dxi;
        s_pos += alpha_d * ds_pos;
        s_neg += alpha_d * ds_neg;
        mu += alpha_d * dmu;
        if (m > 0) nu += alpha_d * dnu;
    }

    WeightSolution sol;
    sol.weights = z.head(k);
    if (ic) sol.intercept = z[k];
    sol.objective = objective_value(problem, sol.weights, sol.intercept.value_or(0.0));
    sol.iterations = iter;
    sol.converged = converged;
    sol.eq_duals = nu;
    sol.bound_duals = Vector::Zero(k);
    if (problem.constraints.nonnegative) sol.bound_duals = mu.head(k);
    const KktDiagnostics kkt = kkt_report(sol, problem);
    sol.kkt_stationarity = kkt.stationarity;
    sol.kkt_feasibility = kkt.primal_feasibility;
    if (!converged)
        throw NotConverged("interior-point solver hit the iteration cap (stationarity " +
                               std::to_string(sol.kkt_stationarity) + ", feasibility " +
                               std::to_string(sol.kkt_feasibility) + ")",
                           sol.kkt_stationarity, sol.kkt_feasibility, iter);
    return sol;
}

}  // namespace assemblage
