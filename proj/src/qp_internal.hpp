#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "assemblage/solver.hpp"

namespace assemblage::detail {

/// Generic convex QP in z-space:
///   minimize 1/2 z'Qz + q'z   s.t.  A z = b,  z_i >= 0 for bounded i.
/// Callers are expected to add a small tie-break floor to Q so the
/// restriction of Q to any feasible subspace is positive definite.
struct QpProblem {
    Matrix Q;
    Vector q;
    Matrix A;  // m x n, m may be zero
    Vector b;
    std::vector<char> bounded;  // size n

    // Exact objective gradient at z. When empty, Q z + q is used. Supplying
    // a cancellation-free form keeps the multiplier sign test meaningful at
    // extreme penalty strengths (lambda ~ 1e10).
    std::function<Vector(const Vector&)> gradient;
};

struct QpResult {
    Vector z;
    Vector eq_duals;     // m
    Vector bound_duals;  // n, zero on inactive or unbounded coordinates
    int iterations = 0;
    bool converged = false;
};

/// Primal active-set method. z0 must satisfy A z0 = b and the bounds.
QpResult solve_qp_active_set(const QpProblem& qp, Vector z0, int max_iter);

/// Phase 1: point with A z = b and z >= 0 on bounded coordinates, found by
/// nonnegative least squares on ||Az - b||^2. Throws InfeasibleConstraints
/// when the residual cannot be driven to zero. `seed` optionally warm-starts
/// the search.
Vector feasible_start(const Matrix& A, const Vector& b, const std::vector<char>& bounded,
                      const Vector* seed);

/// Solve H x = rhs for symmetric positive (semi)definite H with LDLT,
/// escalating a diagonal jitter deterministically if the factorization is
/// unreliable, plus iterative refinement.
Vector solve_spd(Matrix H, const Vector& rhs);

/// (K-1) x K first-difference operator; D w gives adjacent differences.
Matrix difference_operator(Eigen::Index k);

}  // namespace assemblage::detail
