#include <algorithm>
#include <cmath>

#include "qp_internal.hpp"

namespace assemblage::detail {

using Eigen::Index;

Matrix difference_operator(Index k) {
    Matrix d = Matrix::Zero(std::max<Index>(k - 1, 0), k);
    for (Index i = 0; i + 1 < k; ++i) {
        d(i, i) = -1.0;
        d(i, i + 1) = 1.0;
    }
    return d;
}

Vector solve_spd(Matrix H, const Vector& rhs) {
    const Index n = H.rows();
    if (n == 0) return Vector();
    const double scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
    double jitter = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix Hj = H;
        if (jitter > 0.0) Hj.diagonal().array() += jitter;
        Eigen::LDLT<Matrix> ldlt(Hj);
        if (ldlt.info() == Eigen::Success) {
            Vector x = ldlt.solve(rhs);
            // two refinement passes against the jittered matrix
            for (int r = 0; r < 2; ++r) x += ldlt.solve(rhs - Hj * x);
            const double resid = (Hj * x - rhs).cwiseAbs().maxCoeff();
            if (resid <= 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()) || attempt == 5) return x;
        }
        jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
    }
    return Eigen::LDLT<Matrix>(H).solve(rhs);  // unreachable
}

QpResult solve_qp_active_set(const QpProblem& qp, Vector z, int max_iter) {
    const Index n = qp.Q.rows();
    const Index m = qp.A.rows();
    auto gradient = [&](const Vector& x) -> Vector {
        return qp.gradient ? qp.gradient(x) : Vector(qp.Q * x + qp.q);
    };

    QpResult res;
    res.eq_duals = Vector::Zero(m);
    res.bound_duals = Vector::Zero(n);

    std::vector<char> active(static_cast<size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
        if (qp.bounded[static_cast<size_t>(i)] && z[i] <= 1e-14) {
            z[i] = 0.0;
            active[static_cast<size_t>(i)] = 1;
        }
    }

    std::vector<Index> free_idx;
    free_idx.reserve(static_cast<size_t>(n));

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        free_idx.clear();
        for (Index i = 0; i < n; ++i)
            if (!active[static_cast<size_t>(i)]) free_idx.push_back(i);
        const Index f = static_cast<Index>(free_idx.size());

        const Vector g = gradient(z);
        const double gscale = 1.0 + (n > 0 ? g.cwiseAbs().maxCoeff() : 0.0);

        // Equality-constrained subproblem on the free coordinates:
        //   min 1/2 p'Qp + g'p  s.t.  A p = 0, p_i = 0 for active i.
        Vector p = Vector::Zero(n);
        Eigen::ColPivHouseholderQR<Matrix> qr;  // of A_free', reused for multipliers
        Index rank = 0;
        if (f > 0) {
            Matrix Qff(f, f);
            Vector gf(f);
            for (Index j = 0; j < f; ++j) {
                gf[j] = g[free_idx[static_cast<size_t>(j)]];
                for (Index i = 0; i < f; ++i)
                    Qff(i, j) = qp.Q(free_idx[static_cast<size_t>(i)], free_idx[static_cast<size_t>(j)]);
            }
            if (m == 0) {
                Vector pf = solve_spd(Qff, -gf);
                for (Index i = 0; i < f; ++i) p[free_idx[static_cast<size_t>(i)]] = pf[i];
            } else {
                Matrix AfT(f, m);
                for (Index i = 0; i < f; ++i)
                    for (Index j = 0; j < m; ++j)
                        AfT(i, j) = qp.A(j, free_idx[static_cast<size_t>(i)]);
                qr.compute(AfT);
                rank = qr.rank();
                if (rank < f) {
                    Matrix Qfull = qr.householderQ() * Matrix::Identity(f, f);
                    Matrix null_basis = Qfull.rightCols(f - rank);
                    Matrix H = null_basis.transpose() * Qff * null_basis;
                    Vector y = solve_spd(H, -null_basis.transpose() * gf);
                    Vector pf = null_basis * y;
                    for (Index i = 0; i < f; ++i) p[free_idx[static_cast<size_t>(i)]] = pf[i];
                }
            }
        }

        const double znorm = 1.0 + (n > 0 ? z.cwiseAbs().maxCoeff() : 0.0);
        if ((n == 0 ? 0.0 : p.cwiseAbs().maxCoeff()) <= 1e-12 * znorm) {
            // Candidate optimum on the current working set; check multipliers.
            Vector nu = Vector::Zero(m);
            if (m > 0 && f > 0) {
                Matrix AfT(f, m);
                Vector gf(f);
                for (Index i = 0; i < f; ++i) {
                    gf[i] = g[free_idx[static_cast<size_t>(i)]];
                    for (Index j = 0; j < m; ++j)
                        AfT(i, j) = qp.A(j, free_idx[static_cast<size_t>(i)]);
                }
                nu = qr.rank() > 0 ? Vector(qr.solve(gf)) : Vector(Eigen::ColPivHouseholderQR<Matrix>(AfT).solve(gf));
            }
            const Vector atnu = m > 0 ? Vector(qp.A.transpose() * nu) : Vector::Zero(n);
            double worst = 0.0;
            Index worst_i = -1;
            for (Index i = 0; i < n; ++i) {
                if (!active[static_cast<size_t>(i)]) continue;
                const double mu = g[i] - atnu[i];
                if (mu < worst) {
                    worst = mu;
                    worst_i = i;
                }
            }
            if (worst_i < 0 || worst >= -1e-10 * gscale) {
                res.eq_duals = nu;
                for (Index i = 0; i < n; ++i)
                    if (active[static_cast<size_t>(i)]) res.bound_duals[i] = std::max(0.0, g[i] - atnu[i]);
                res.converged = true;
                ++iter;
                break;
            }
            active[static_cast<size_t>(worst_i)] = 0;
            continue;
        }

        // Largest feasible step toward the subproblem optimum.
        double alpha = 1.0;
        Index blocker = -1;
        for (Index i : free_idx) {
            if (!qp.bounded[static_cast<size_t>(i)] || p[i] >= 0.0) continue;
            const double ratio = z[i] <= 0.0 ? 0.0 : z[i] / (-p[i]);
            if (ratio < alpha) {
                alpha = ratio;
                blocker = i;
            }
        }
        if (alpha > 0.0) z += alpha * p;
        if (blocker >= 0) {
            z[blocker] = 0.0;
            active[static_cast<size_t>(blocker)] = 1;
        }
        for (Index i = 0; i < n; ++i)
            if (qp.bounded[static_cast<size_t>(i)] && z[i] < 0.0) z[i] = 0.0;
    }

    res.z = std::move(z);
    res.iterations = iter;
    return res;
}

Vector feasible_start(const Matrix& A, const Vector& b, const std::vector<char>& bounded,
                      const Vector* seed) {
    const Index n = A.cols();
    const bool any_bound = std::any_of(bounded.begin(), bounded.end(), [](char c) { return c != 0; });
    if (!any_bound) {
        return A.completeOrthogonalDecomposition().solve(b);
    }
    QpProblem nnls;
    nnls.Q = 2.0 * (A.transpose() * A);
    nnls.Q.diagonal().array() += 2e-10;
    nnls.q = -2.0 * (A.transpose() * b);
    nnls.A = Matrix(0, n);
    nnls.b = Vector();
    nnls.bounded = bounded;
    Vector z0 = Vector::Zero(n);
    if (seed && seed->size() == n) {
        z0 = *seed;
        for (Index i = 0; i < n; ++i)
            if (bounded[static_cast<size_t>(i)] && z0[i] < 0.0) z0[i] = 0.0;
    }
    QpResult r = solve_qp_active_set(nnls, std::move(z0), 20000);
    const double resid = b.size() == 0 ? 0.0 : (A * r.z - b).cwiseAbs().maxCoeff();
    const double tol = 1e-8 * (1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0));
    if (resid > tol)
        throw InfeasibleConstraints("equality constraints incompatible with nonnegativity (residual " +
                                    std::to_string(resid) + ")");
    return r.z;
}

}  // namespace assemblage::detail
