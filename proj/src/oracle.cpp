#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <vector>

#include "assemblage/solver.hpp"

namespace assemblage {

using Eigen::Index;

namespace {

// The oracle deliberately avoids the production solver's code paths: the
// objective is evaluated with plain loops.
struct GridEvaluator {
    const PenalizedProblem* pb = nullptr;
    Matrix basis;     // n x d null-space directions (n includes intercept)
    Vector particular;  // n, solves the equalities
    Index k = 0;
    bool intercept = false;
    long evals = 0;

    Vector point(const Vector& theta) const { return particular + basis * theta; }

    bool feasible(const Vector& z, double slack) const {
        if (!pb->constraints.nonnegative) return true;
        for (Index i = 0; i < k; ++i)
            if (z[i] < -slack) return false;
        return true;
    }

    double objective(const Vector& z) {
        ++evals;
        const auto& d = pb->design;
        double data = 0.0;
        const double w0 = intercept ? z[k] : 0.0;
        for (Index t = 0; t < d.rows(); ++t) {
            double fit = w0;
            for (Index i = 0; i < k; ++i) fit += d(t, i) * z[i];
            const double u = pb->response[t] - fit;
            if (pb->loss.kind == LossKind::Squared)
                data += u * u;
            else
                data += (u > 0.0 ? pb->loss.tau : pb->loss.tau - 1.0) * u;
        }
        double pen = 0.0;
        if (pb->penalty.kind == PenaltyKind::CenteredRidge) {
            for (Index i = 0; i < k; ++i) {
                const double v = z[i] - pb->penalty.center[i];
                pen += v * v;
            }
        } else {
            for (Index i = 0; i + 1 < k; ++i) {
                const double v = z[i + 1] - z[i];
                pen += v * v;
            }
        }
        return data + pb->lambda * pen;
    }
};

struct HalfPlane {
    // c0 + c'theta >= 0
    double c0;
    Vector c;
};

struct Candidate {
    Vector theta;
    double value;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value < b.value;
    for (Index i = 0; i < a.theta.size(); ++i)
        if (a.theta[i] != b.theta[i]) return a.theta[i] < b.theta[i];
    return false;
}

// `top` stays sorted best-first and bounded by cap.
void keep_best(std::vector<Candidate>& top, size_t cap, Vector theta, double value) {
    Candidate c{std::move(theta), value};
    if (top.size() >= cap && !candidate_less(c, top.back())) return;
    const auto pos = std::lower_bound(top.begin(), top.end(), c, candidate_less);
    top.insert(pos, std::move(c));
    if (top.size() > cap) top.pop_back();
}

// One axis-aligned exact line minimization per coordinate, iterated; exact
// for quadratics, skipped entirely for pinball objectives.
Vector parabolic_polish(GridEvaluator& ev, const std::vector<HalfPlane>& planes, Vector theta,
                        double step) {
    const Index d = theta.size();
    auto ok = [&](const Vector& th) {
        for (const auto& hp : planes)
            if (hp.c0 + hp.c.dot(th) < -1e-12) return false;
        return true;
    };
    double f0 = ev.objective(ev.point(theta));
    for (int sweep = 0; sweep < 40; ++sweep) {
        double improved = 0.0;
        for (Index j = 0; j < d; ++j) {
            Vector lo = theta, hi = theta;
            lo[j] -= step;
            hi[j] += step;
            if (!ok(lo) || !ok(hi)) continue;
            const double fl = ev.objective(ev.point(lo));
            const double fh = ev.objective(ev.point(hi));
            const double curv = fl - 2.0 * f0 + fh;
            if (curv <= 0.0) continue;
            const double shift = 0.5 * step * (fl - fh) / curv;
            if (std::abs(shift) > step) continue;
            Vector trial = theta;
            trial[j] += shift;
            if (!ok(trial)) continue;
            const double ft = ev.objective(ev.point(trial));
            if (ft < f0) {
                improved += f0 - ft;
                theta = trial;
                f0 = ft;
            }
        }
        if (improved <= 1e-18 * (1.0 + std::abs(f0))) break;
    }
    return theta;
}

}  // namespace

WeightSolution brute_force_oracle(const PenalizedProblem& problem, double step) {
    problem.validate();
    if (!(step > 0.0)) throw InvalidInput("oracle step must be positive");
    const Index k = problem.num_components();
    if (k > 3) throw TooManyDimensions("brute_force_oracle supports K <= 3, got K = " + std::to_string(k));
    const bool ic = problem.constraints.include_intercept;
    const Index n = k + (ic ? 1 : 0);
    const Index m = static_cast<Index>(problem.constraints.equalities.size());

    GridEvaluator ev;
    ev.pb = &problem;
    ev.k = k;
    ev.intercept = ic;

    if (m == 0) {
        ev.particular = Vector::Zero(n);
        ev.basis = Matrix::Identity(n, n);
    } else {
        Matrix eq = Matrix::Zero(m, n);
        Vector rhs(m);
        for (Index j = 0; j < m; ++j) {
            eq.row(j).head(k) = problem.constraints.equalities[static_cast<size_t>(j)].coeffs;
            rhs[j] = problem.constraints.equalities[static_cast<size_t>(j)].rhs;
        }
        const auto cod = eq.completeOrthogonalDecomposition();
        ev.particular = cod.solve(rhs);
        if ((eq * ev.particular - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff()))
            throw InfeasibleConstraints("equality system is inconsistent");
        Eigen::FullPivLU<Matrix> lu(eq);
        lu.setThreshold(1e-10);
        ev.basis = lu.kernel();
        if (ev.basis.cols() == 1 && ev.basis.isZero(0)) ev.basis = Matrix(n, 0);
    }
    const Index dim = ev.basis.cols();
    if (dim > 2)
        throw TooManyDimensions("feasible set has dimension " + std::to_string(dim) +
                                " after equalities; the oracle sweeps at most 2");

    // Orthonormalize the kernel, then rescale so a unit theta-step moves the
    // largest weight coordinate by one (grid steps are then in weight units,
    // and ||B theta|| >= ||theta|| which keeps coercivity radii valid).
    if (dim > 0) {
        Eigen::HouseholderQR<Matrix> bqr(ev.basis);
        Matrix q = bqr.householderQ() * Matrix::Identity(n, dim);
        ev.basis = q;
        for (Index j = 0; j < dim; ++j) {
            Index arg = 0;
            ev.basis.col(j).cwiseAbs().maxCoeff(&arg);
            ev.basis.col(j) /= ev.basis.col(j)[arg];
        }
    }

    if (dim == 0) {
        const Vector z = ev.particular;
        if (!ev.feasible(z, 1e-9))
            throw InfeasibleConstraints("the single feasible point violates nonnegativity");
        WeightSolution sol;
        sol.weights = z.head(k);
        if (ic) sol.intercept = z[k];
        sol.objective = ev.objective(z);
        sol.converged = true;
        sol.iterations = 1;
        return sol;
    }

    // Half-planes from nonnegativity in theta space.
    std::vector<HalfPlane> planes;
    if (problem.constraints.nonnegative) {
        for (Index i = 0; i < k; ++i) {
            HalfPlane hp;
            hp.c0 = ev.particular[i];
            hp.c = ev.basis.row(i).transpose();
            planes.push_back(std::move(hp));
        }
    }

    // Bounding box: polytope vertices where available, otherwise a coercivity
    // radius from the penalty (or a documented hard cap when lambda == 0).
    Vector box_lo = Vector::Constant(dim, std::numeric_limits<double>::infinity());
    Vector box_hi = Vector::Constant(dim, -std::numeric_limits<double>::infinity());
    auto widen = [&](const Vector& th) {
        box_lo = box_lo.cwiseMin(th);
        box_hi = box_hi.cwiseMax(th);
    };
    if (dim == 1) {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (const auto& hp : planes) {
            const double c1 = hp.c[0];
            if (std::abs(c1) < 1e-14) {
                if (hp.c0 < -1e-12) throw InfeasibleConstraints("nonnegativity excludes the equality line");
                continue;
            }
            if (c1 > 0.0)
                lo = std::max(lo, -hp.c0 / c1);
            else
                hi = std::min(hi, -hp.c0 / c1);
        }
        if (lo > hi + 1e-12) throw InfeasibleConstraints("empty feasible interval");
        box_lo[0] = lo;
        box_hi[0] = hi;
    } else {
        for (size_t a = 0; a < planes.size(); ++a) {
            for (size_t b = a + 1; b < planes.size(); ++b) {
                Eigen::Matrix2d mat;
                mat << planes[a].c[0], planes[a].c[1], planes[b].c[0], planes[b].c[1];
                if (std::abs(mat.determinant()) < 1e-12) continue;
                Eigen::Vector2d v = mat.inverse() * Eigen::Vector2d(-planes[a].c0, -planes[b].c0);
                Vector th = v;
                bool feas = true;
                for (const auto& hp : planes)
                    if (hp.c0 + hp.c.dot(th) < -1e-9) feas = false;
                if (feas) widen(th);
            }
        }
    }
    auto feasible_theta = [&](const Vector& th) {
        for (const auto& hp : planes)
            if (hp.c0 + hp.c.dot(th) < -1e-12) return false;
        return true;
    };

    // The vertex box bounds the feasible set only when its recession cone is
    // trivial. Otherwise widen by a coercivity ball: outside it the penalty
    // alone already beats a feasible reference value. With lambda == 0 a
    // hard cap stands in (documented; not exercised by the estimators).
    bool unbounded = false;
    if (dim == 1) {
        unbounded = !std::isfinite(box_lo[0]) || !std::isfinite(box_hi[0]);
    } else {
        std::vector<Vector> rays;
        for (const auto& hp : planes) {
            if (hp.c.norm() < 1e-14) continue;
            Vector perp(2);
            perp << -hp.c[1], hp.c[0];
            perp /= perp.norm();
            rays.push_back(perp);
            rays.push_back(-perp);
        }
        if (rays.empty()) {
            unbounded = true;  // no effective constraints
        } else {
            for (const auto& d : rays) {
                bool recedes = true;
                for (const auto& hp : planes)
                    if (hp.c.dot(d) < -1e-12 * (1.0 + hp.c.norm())) recedes = false;
                if (recedes) unbounded = true;
            }
        }
    }
    if (unbounded) {
        double radius = 1e3;
        if (problem.lambda > 0.0) {
            double f_ref = std::numeric_limits<double>::infinity();
            const Vector zero_theta = Vector::Zero(dim);
            if (feasible_theta(zero_theta)) f_ref = ev.objective(ev.point(zero_theta));
            for (Index j = 0; j < dim; ++j) {  // vertex box corners double as references
                Vector th = zero_theta;
                if (std::isfinite(box_lo[j])) {
                    th[j] = box_lo[j];
                    if (feasible_theta(th)) f_ref = std::min(f_ref, ev.objective(ev.point(th)));
                }
                if (std::isfinite(box_hi[j])) {
                    th[j] = box_hi[j];
                    if (feasible_theta(th)) f_ref = std::min(f_ref, ev.objective(ev.point(th)));
                }
            }
            if (std::isfinite(f_ref)) {
                const double center_gap =
                    problem.penalty.kind == PenaltyKind::CenteredRidge
                        ? (ev.particular.head(k) - problem.penalty.center).norm()
                        : ev.particular.head(k).norm();
                radius = center_gap + std::sqrt(f_ref / problem.lambda) + 1.0;
            }
        }
        for (Index j = 0; j < dim; ++j) {
            box_lo[j] = std::isfinite(box_lo[j]) ? std::min(box_lo[j], -radius) : -radius;
            box_hi[j] = std::isfinite(box_hi[j]) ? std::max(box_hi[j], radius) : radius;
        }
    }

    std::vector<Candidate> top;
    long total_evals = 0;

    if (dim == 1) {
        // Exhaustive sweep at exactly `step`, endpoints included.
        const double lo = box_lo[0], hi = box_hi[0];
        const long count = hi > lo ? static_cast<long>(std::floor((hi - lo) / step)) : 0;
        Vector th(1);
        double best = std::numeric_limits<double>::infinity();
        Vector best_th(1);
        for (long j = 0; j <= count + 1; ++j) {
            th[0] = j <= count ? lo + static_cast<double>(j) * step : hi;
            if (th[0] > hi) th[0] = hi;
            const double f = ev.objective(ev.point(th));
            if (f < best) {
                best = f;
                best_th = th;
            }
        }
        top.push_back({best_th, best});
    } else {
        // Staged refinement down to `step`; convexity keeps the incumbent
        // basin inside the kept candidates' boxes.
        const double extent = std::max((box_hi - box_lo).maxCoeff(), step);
        double s = std::max(step, extent / 400.0);
        std::vector<std::pair<Vector, Vector>> regions{{box_lo, box_hi}};
        const size_t keep = 64;
        while (true) {
            std::vector<Candidate> stage;
            std::unordered_set<long long> seen;
            for (const auto& [lo, hi] : regions) {
                const long n0 = static_cast<long>(std::floor((hi[0] - lo[0]) / s)) + 1;
                const long n1 = static_cast<long>(std::floor((hi[1] - lo[1]) / s)) + 1;
                Vector th(2);
                for (long i0 = 0; i0 <= n0; ++i0) {
                    th[0] = std::min(lo[0] + static_cast<double>(i0) * s, hi[0]);
                    for (long i1 = 0; i1 <= n1; ++i1) {
                        th[1] = std::min(lo[1] + static_cast<double>(i1) * s, hi[1]);
                        const long long key =
                            static_cast<long long>(std::llround((th[0] - box_lo[0]) / s)) * (1LL << 32) +
                            std::llround((th[1] - box_lo[1]) / s);
                        if (!seen.insert(key).second) continue;
                        if (!feasible_theta(th)) continue;
                        keep_best(stage, keep, th, ev.objective(ev.point(th)));
                    }
                }
            }
            if (stage.empty()) throw InfeasibleConstraints("no feasible grid point in the 2-D sweep");
            if (s <= step * (1.0 + 1e-12)) {
                top = std::move(stage);
                break;
            }
            const double s_next = std::max(step, s / 10.0);
            regions.clear();
            for (const auto& c : stage) {
                Vector lo = (c.theta.array() - 2.5 * s).matrix().cwiseMax(box_lo);
                Vector hi = (c.theta.array() + 2.5 * s).matrix().cwiseMin(box_hi);
                regions.emplace_back(lo, hi);
            }
            s = s_next;
        }
    }

    Vector best_theta = top.front().theta;
    if (problem.loss.kind == LossKind::Squared)
        best_theta = parabolic_polish(ev, planes, best_theta, step);

    total_evals = ev.evals;
    const Vector z = ev.point(best_theta);
    WeightSolution sol;
    sol.weights = z.head(k);
    if (ic) sol.intercept = z[k];
    sol.objective = ev.objective(z);
    sol.converged = true;
    sol.iterations = static_cast<int>(std::min<long>(total_evals, std::numeric_limits<int>::max()));
    return sol;
}

}  // namespace assemblage
