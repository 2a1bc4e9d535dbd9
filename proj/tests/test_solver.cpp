#include <gtest/gtest.h>

#include <Eigen/LU>

#include <vector>

#include "monodiff/pipeline.hpp"
#include "monodiff/problems.hpp"

using namespace monodiff;

namespace {

SparseSystem tridiagonal(int n) {
    std::vector<Eigen::Triplet<double, int>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i > 0) t.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    return make_system(n, t, Vector::Ones(n));
}

}  // namespace

TEST(Solver, TridiagonalHandSolution) {
    // -u'' = 1 on 4 interior points: u_i = i (5 - i) / 2
    const SolveResult r = solve(tridiagonal(4));
    ASSERT_TRUE(r.report.converged);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.u[i], (i + 1) * (4 - i) / 2.0, 1e-9);
    EXPECT_LE(r.report.final_relative_residual, 1e-10);
    EXPECT_FALSE(r.report.method_name.empty());
}

TEST(Solver, ResidualOfKnownVector) {
    const SparseSystem s = tridiagonal(3);
    EXPECT_DOUBLE_EQ(residual(s, Vector::Zero(3)), 1.0);
    EXPECT_THROW(residual(s, Vector::Zero(2)), SolverError);
}

TEST(Solver, ZeroRightHandSide) {
    SparseSystem s = tridiagonal(5);
    s.rhs.setZero();
    const SolveResult r = solve(s);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.method_name, "trivial");
    EXPECT_EQ(r.u.norm(), 0.0);
}

TEST(Solver, UnreachableToleranceIsReported) {
    SolveOptions o;
    o.tol = 1e-300;
    const SolveResult r = solve(tridiagonal(50), o);
    EXPECT_FALSE(r.report.converged);
    EXPECT_LT(r.report.final_relative_residual, 1e-12);
}

TEST(Solver, Deterministic) {
    const Problem p = exam2_problem();
    const FieldAnalysis an = analyze_field(p.field());
    const RunResult a = run_problem(p, an, 30);
    const RunResult b = run_problem(p, an, 30);
    EXPECT_EQ(a.solution.u, b.solution.u);
    EXPECT_EQ(a.solution.report.iterations, b.solution.report.iterations);
}

TEST(Solver, InverseIsNonnegative) {
    const Problem p = exam1_problem();
    const FieldAnalysis an = analyze_field(p.field());
    const RunResult r = run_problem(p, an, 12);
    ASSERT_TRUE(r.audit.passed);
    const Eigen::MatrixXd inv = Eigen::MatrixXd(r.system.matrix).inverse();
    EXPECT_GE(inv.minCoeff(), -1e-12);
}

TEST(Solver, DimensionMismatch) {
    SparseSystem s = tridiagonal(3);
    s.rhs = Vector::Ones(2);
    EXPECT_THROW(solve(s), SolverError);
    EXPECT_THROW(make_system(3, {}, Vector::Ones(2)), SolverError);
}
