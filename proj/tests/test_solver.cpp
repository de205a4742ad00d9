#include <doctest.h>

#include <cmath>

#include "assemblage/solver.hpp"
#include "corpus.hpp"

using namespace assemblage;

namespace {

PenalizedProblem two_component_reference_problem() {
    // T=4 rows (1,0),(0,1),(1,1),(2,0), y = 1, lambda = 0.5,
    // CenteredRidge(0.5, 0.5), w >= 0, sum-to-one.
    PenalizedProblem pb;
    pb.design.resize(4, 2);
    pb.design << 1, 0, 0, 1, 1, 1, 2, 0;
    pb.response = Vector::Ones(4);
    pb.lambda = 0.5;
    pb.penalty = PenaltySpec::centered_ridge((Vector(2) << 0.5, 0.5).finished());
    LinearEquality eq{Vector::Ones(2), 1.0};
    pb.constraints.equalities.push_back(eq);
    return pb;
}

}  // namespace

TEST_CASE("exact-fit identity: weight lands on the matching column") {
    PenalizedProblem pb;
    pb.design.resize(6, 2);
    pb.design << 1.0, 0.3, 2.0, -0.4, -1.0, 0.9, 0.5, 1.2, 1.5, -2.0, -0.2, 0.1;
    pb.response = pb.design.col(0);
    pb.lambda = 0.0;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));
    pb.constraints.equalities.push_back({Vector::Ones(2), 1.0});

    const WeightSolution sol = solve_penalized_ls(pb);
    CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.weights[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("huge lambda pins the solution to the ridge center") {
    testutil::Rng rng(7);
    PenalizedProblem pb;
    pb.design.resize(12, 2);
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 2; ++c) pb.design(r, c) = rng.normal();
    pb.response.resize(12);
    for (int r = 0; r < 12; ++r) pb.response[r] = rng.normal();
    pb.lambda = 1e10;
    pb.penalty = PenaltySpec::centered_ridge((Vector(2) << 0.6, 0.4).finished());
    pb.constraints.equalities.push_back({Vector::Ones(2), 1.0});

    const WeightSolution sol = solve_penalized_ls(pb);
    CHECK(std::abs(sol.weights[0] - 0.6) < 1e-4);
    CHECK(std::abs(sol.weights[1] - 0.4) < 1e-4);
}

TEST_CASE("solver matches the grid oracle on the two-component reference instance") {
    const PenalizedProblem pb = two_component_reference_problem();
    const WeightSolution main = solve_penalized_ls(pb);
    const WeightSolution oracle = brute_force_oracle(pb, 1e-5);
    CHECK(std::abs(main.weights[0] - oracle.weights[0]) < 1e-4);
    CHECK(std::abs(main.weights[1] - oracle.weights[1]) < 1e-4);
    CHECK(main.objective <= oracle.objective + 1e-8);
}

TEST_CASE("pinball loss evaluates per its definition") {
    CHECK(pinball(0.85, 1.0) == doctest::Approx(0.85));
    CHECK(pinball(0.85, -1.0) == doctest::Approx(0.15));
    CHECK(pinball(0.85, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("tau = 0.5 objective is half the penalized absolute-deviation objective") {
    testutil::Rng rng(11);
    PenalizedProblem pb;
    pb.design.resize(10, 2);
    pb.response.resize(10);
    for (int r = 0; r < 10; ++r) {
        pb.design(r, 0) = rng.normal();
        pb.design(r, 1) = rng.normal();
        pb.response[r] = rng.normal();
    }
    pb.loss = LossSpec::pinball(0.5);
    pb.lambda = 0.7;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));

    const Vector w = (Vector(2) << 0.3, 0.6).finished();
    const double obj = objective_value(pb, w);
    const Vector resid = pb.response - pb.design * w;
    const double lad = resid.cwiseAbs().sum();
    const double pen = (w.array() - 0.5).square().sum();
    // rho_{0.5}(u) = 0.5 |u|; the lambda term is shared, so compare
    // against half of the LAD objective with half the penalty folded in.
    CHECK(obj == doctest::Approx(0.5 * lad + pb.lambda * pen).epsilon(1e-12));
}

TEST_CASE("quantile solve matches the grid oracle objective on a hand-built instance") {
    PenalizedProblem pb;
    pb.design.resize(6, 2);
    pb.design << 1.0, 0.2, 0.4, 1.1, -0.3, 0.8, 1.4, -0.5, 0.6, 0.6, -0.8, 1.9;
    pb.response.resize(6);
    pb.response << 0.9, 1.0, 0.4, 0.7, 0.8, 1.2;
    pb.loss = LossSpec::pinball(0.85);
    pb.lambda = 0.0;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));
    pb.constraints.equalities.push_back({Vector::Ones(2), 1.0});

    const WeightSolution main = solve_penalized_quantile(pb);
    const WeightSolution oracle = brute_force_oracle(pb, 1e-5);
    CHECK(std::abs(main.objective - oracle.objective) < 1e-3);
    CHECK(main.kkt_stationarity < 1e-6);
    CHECK(main.weights.minCoeff() >= -1e-9);
    CHECK(std::abs(main.weights.sum() - 1.0) < 1e-7);
}

TEST_CASE("kkt report: unconstrained least-squares solution is stationary") {
    testutil::Rng rng(23);
    PenalizedProblem pb;
    pb.design.resize(15, 2);
    pb.response.resize(15);
    for (int r = 0; r < 15; ++r) {
        pb.design(r, 0) = rng.normal();
        pb.design(r, 1) = rng.normal();
        pb.response[r] = rng.normal();
    }
    pb.lambda = 0.0;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Zero(2));
    pb.constraints.nonnegative = false;

    WeightSolution sol;
    sol.weights = (pb.design.transpose() * pb.design)
                      .ldlt()
                      .solve(pb.design.transpose() * pb.response);
    const KktDiagnostics diag = kkt_report(sol, pb);
    CHECK(diag.stationarity <= 1e-9);
    CHECK(diag.primal_feasibility == doctest::Approx(0.0));
}

TEST_CASE("kkt report flags a negative weight as a feasibility gap") {
    PenalizedProblem pb = two_component_reference_problem();
    WeightSolution sol;
    sol.weights = (Vector(2) << 1.2, -0.2).finished();
    const KktDiagnostics diag = kkt_report(sol, pb);
    CHECK(diag.primal_feasibility > 0.0);
    CHECK(diag.primal_feasibility == doctest::Approx(0.2));
}

TEST_CASE("kkt report: oracle solution of the reference instance is near-stationary") {
    const PenalizedProblem pb = two_component_reference_problem();
    const WeightSolution oracle = brute_force_oracle(pb, 1e-5);
    const KktDiagnostics diag = kkt_report(oracle, pb);
    CHECK(diag.stationarity <= 1e-6);
    CHECK(diag.primal_feasibility <= 1e-9);
    CHECK(diag.complementary_slackness <= 1e-6);
}

TEST_CASE("oracle handles the degenerate one-component simplex") {
    PenalizedProblem pb;
    pb.design.resize(5, 1);
    pb.design << 1, 2, 3, 4, 5;
    pb.response = (Vector(5) << -1, 0, 1, 0, -1).finished();
    pb.lambda = 0.3;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Zero(1));
    pb.constraints.equalities.push_back({Vector::Ones(1), 1.0});
    const WeightSolution sol = brute_force_oracle(pb, 1e-5);
    CHECK(sol.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("oracle finds the exact-fit vertex at lambda zero") {
    PenalizedProblem pb;
    pb.design.resize(4, 2);
    pb.design << 1, 0.5, 2, 1.0, 3, 1.5, -1, -0.5;
    pb.response = pb.design.col(0);  // attained at w = (1, 0)
    pb.lambda = 0.0;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));
    pb.constraints.equalities.push_back({Vector::Ones(2), 1.0});
    const WeightSolution sol = brute_force_oracle(pb, 1e-5);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("infeasible equality under nonnegativity is reported") {
    PenalizedProblem pb;
    pb.design.resize(4, 2);
    pb.design.setOnes();
    pb.response = Vector::Ones(4);
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));
    pb.constraints.equalities.push_back({Vector::Ones(2), -1.0});
    CHECK_THROWS_AS(solve_penalized_ls(pb), InfeasibleConstraints);
}

TEST_CASE("shape mismatches are rejected") {
    PenalizedProblem pb;
    pb.design.resize(4, 2);
    pb.design.setOnes();
    pb.response = Vector::Ones(3);
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(2, 0.5));
    CHECK_THROWS_AS(solve_penalized_ls(pb), ShapeMismatch);
}

TEST_CASE("oracle rejects problems with more than two free dimensions") {
    PenalizedProblem pb;
    pb.design.resize(4, 3);
    pb.design.setRandom();
    pb.response = Vector::Ones(4);
    pb.lambda = 1.0;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(3, 1.0 / 3));
    CHECK_THROWS_AS(brute_force_oracle(pb, 1e-3), TooManyDimensions);
}

TEST_CASE("solver tracks the oracle objective across the random corpus") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        CAPTURE(seed);
        const PenalizedProblem pb = testutil::random_small_problem(seed);
        const WeightSolution main = solve_penalized_ls(pb);
        const WeightSolution oracle = brute_force_oracle(pb, 1e-5);
        const double tol = 1e-6 + 1e-4 * std::abs(oracle.objective);
        CHECK(std::abs(main.objective - oracle.objective) <= tol);
        if (pb.constraints.nonnegative) CHECK(main.weights.minCoeff() >= -1e-9);
        for (const auto& eq : pb.constraints.equalities)
            CHECK(std::abs(eq.coeffs.dot(main.weights) - eq.rhs) <= 1e-7);
        CHECK(main.kkt_stationarity <= 1e-8);
    }
}

TEST_CASE("lambda limits: centered ridge collapses to the center, fused to equal weights") {
    testutil::Rng rng(31);
    PenalizedProblem pb;
    pb.design.resize(20, 3);
    pb.response.resize(20);
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 3; ++c) pb.design(r, c) = 1.0 + rng.normal();
        pb.response[r] = 2.0 + rng.normal();  // positive mean keeps mean-match feasible
    }
    pb.lambda = 1e10;

    SUBCASE("centered") {
        pb.penalty = PenaltySpec::centered_ridge((Vector(3) << 0.2, 0.3, 0.5).finished());
        pb.constraints.equalities.push_back({Vector::Ones(3), 1.0});
        const WeightSolution sol = solve_penalized_ls(pb);
        CHECK((sol.weights - pb.penalty.center).cwiseAbs().maxCoeff() <= 1e-4);
    }
    SUBCASE("fused") {
        pb.penalty = PenaltySpec::fused_ridge();
        LinearEquality eq;
        eq.coeffs = pb.design.colwise().mean();
        eq.rhs = pb.response.mean();
        pb.constraints.equalities.push_back(eq);
        const WeightSolution sol = solve_penalized_ls(pb);
        CHECK(sol.weights.maxCoeff() - sol.weights.minCoeff() <= 1e-4);
        CHECK(std::abs(eq.coeffs.dot(sol.weights) - eq.rhs) <= 1e-7);
    }
}

TEST_CASE("data-fit term is nondecreasing along an ascending lambda grid") {
    const PenalizedProblem base = two_component_reference_problem();
    double lambdas[] = {0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4};
    double prev_fit = -1.0;
    for (double lam : lambdas) {
        PenalizedProblem pb = base;
        pb.lambda = lam;
        const WeightSolution sol = solve_penalized_ls(pb);
        const Vector resid = pb.response - pb.design * sol.weights;
        const double fit = resid.squaredNorm();
        CHECK(fit >= prev_fit - 1e-8);
        prev_fit = fit;
    }
}

TEST_CASE("identical problems produce bitwise-identical solutions") {
    const PenalizedProblem pb = testutil::random_small_problem(5);
    const WeightSolution a = solve_penalized_ls(pb);
    const WeightSolution b = solve_penalized_ls(pb);
    REQUIRE(a.weights.size() == b.weights.size());
    for (Eigen::Index i = 0; i < a.weights.size(); ++i) CHECK(a.weights[i] == b.weights[i]);
    CHECK(a.objective == b.objective);

    PenalizedProblem pq = pb;
    pq.loss = LossSpec::pinball(0.7);
    const WeightSolution qa = solve_penalized_quantile(pq);
    const WeightSolution qb = solve_penalized_quantile(pq);
    for (Eigen::Index i = 0; i < qa.weights.size(); ++i) CHECK(qa.weights[i] == qb.weights[i]);
}

TEST_CASE("pinball gradient matches finite differences away from kinks") {
    testutil::Rng rng(47);
    PenalizedProblem pb;
    pb.design.resize(12, 3);
    pb.response.resize(12);
    for (int r = 0; r < 12; ++r) {
        for (int c = 0; c < 3; ++c) pb.design(r, c) = rng.normal();
        pb.response[r] = rng.normal();
    }
    pb.loss = LossSpec::pinball(0.85);
    pb.lambda = 0.4;
    pb.penalty = PenaltySpec::centered_ridge(Vector::Constant(3, 1.0 / 3));

    const Vector w = (Vector(3) << 0.21, 0.47, 0.19).finished();
    const Vector resid = pb.response - pb.design * w;
    REQUIRE(resid.cwiseAbs().minCoeff() > 1e-4);  // smooth point
    const Vector g = objective_gradient(pb, w);
    const double h = 1e-7;
    for (int i = 0; i < 3; ++i) {
        Vector wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = (objective_value(pb, wp) - objective_value(pb, wm)) / (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("warm starts reproduce the cold-start solution") {
    const PenalizedProblem pb = testutil::random_small_problem(9);
    const WeightSolution cold = solve(pb);
    const WeightSolution warm = solve(pb, &cold);
    CHECK((warm.weights - cold.weights).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(warm.iterations <= cold.iterations);
}
