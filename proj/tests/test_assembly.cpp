#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "monodiff/pipeline.hpp"
#include "monodiff/problems.hpp"
#include "monodiff/verification.hpp"

using namespace monodiff;

namespace {

using Triplet = Eigen::Triplet<double, int>;

Eigen::MatrixXd dense(const SparseSystem& s) { return Eigen::MatrixXd(s.matrix); }

}  // namespace

TEST(ThreePointWeights, EqualArms) {
    const ThreePoint w = directional_term_row(2.0, 4.0, 0.1, 0.1);
    EXPECT_NEAR(w.center, 600.0, 1e-10);
    EXPECT_NEAR(w.plus, -200.0, 1e-10);
    EXPECT_NEAR(w.minus, -400.0, 1e-10);
}

TEST(ThreePointWeights, UnequalArms) {
    const ThreePoint w = directional_term_row(1.0, 1.0, 0.1, 0.05);
    EXPECT_NEAR(w.center, 400.0, 1e-10);
    EXPECT_NEAR(w.plus, -400.0 / 3.0, 1e-10);
    EXPECT_NEAR(w.minus, -800.0 / 3.0, 1e-10);
    EXPECT_NEAR(w.center + w.plus + w.minus, 0.0, 1e-10);
}

TEST(ThreePointWeights, ExactForQuadratics) {
    // -(u)'' of u = s^2 is -2 whatever the arm lengths
    const double sp = 0.07, sm = 0.03;
    const ThreePoint w = directional_term_row(1.0, 1.0, sp, sm);
    const double value = w.center * 0.0 + w.plus * sp * sp + w.minus * sm * sm;
    EXPECT_NEAR(value, -2.0, 1e-12);
}

TEST(ThreePointWeights, NegativeCoefficients) {
    EXPECT_THROW(directional_term_row(-1e-9, 1.0, 0.1, 0.1), AssemblyError);
    const ThreePoint w = directional_term_row(-1e-13, 1.0, 0.1, 0.1);
    EXPECT_EQ(w.plus, 0.0);
    EXPECT_THROW(directional_term_row(1.0, 1.0, 0.0, 0.1), AssemblyError);
}

TEST(Assemble, IdentityGivesFivePointLaplacian) {
    const Problem p{"laplace", identity_field(), Expr::constant(0.0), Expr::parse("x")};
    const FieldAnalysis an = analyze_field(identity_field(), 0.05);
    const RunResult r2 = run_problem(p, an, 2);
    ASSERT_EQ(r2.system.dimension(), 1);
    EXPECT_DOUBLE_EQ(dense(r2.system)(0, 0), 16.0);
    EXPECT_DOUBLE_EQ(r2.solution.u[0], 0.5);

    const RunResult r3 = run_problem(p, an, 3);
    Eigen::MatrixXd expected(4, 4);
    expected << 4, -1, -1, 0, -1, 4, 0, -1, -1, 0, 4, -1, 0, -1, -1, 4;
    expected *= 9.0;
    EXPECT_LT((dense(r3.system) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, ConstantRowSums) {
    // with g = 1 and f = 0 the rows of [A | boundary] sum to zero
    const Problem p{"ones", exam1_field(), Expr::constant(0.0), Expr::constant(1.0)};
    const FieldAnalysis an = analyze_field(exam1_field());
    PipelineOptions o;
    const RunResult r = run_problem(p, an, 20, o);
    const Vector ones = Vector::Ones(r.system.dimension());
    const Vector defect = r.system.matrix * ones - r.system.rhs;
    EXPECT_LT(defect.cwiseAbs().maxCoeff(), 1e-9 * r.system.matrix.coeff(0, 0));
    EXPECT_LT((r.solution.u - ones).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Assemble, ConstantTensorQuadraticsAreExact) {
    const DiffusionField f = constant_field(9.0, 2.0, 3.0);
    const Problem p = manufactured_problem(f, Expr::parse("x^2 + x*y - y^2 + 3*x"), "quad");
    EXPECT_NEAR(p.f({0.3, 0.4}), -16.0, 1e-12);
    const FieldAnalysis an = analyze_field(f, 0.05);
    for (const int n : {5, 12}) {
        const RunResult r = run_problem(p, an, n);
        EXPECT_LT(interior_max_error(r.grid, p, r.solution.u), 1e-9) << n;
    }
}

TEST(Assemble, ExamplesPassTheAudit) {
    for (const char* name : {"exam1", "exam3"}) {
        const Problem p = builtin_problem(name);
        const FieldAnalysis an = analyze_field(p.field());
        const RunResult r = run_problem(p, an, 20);
        EXPECT_TRUE(r.audit.passed) << name << ": " << r.audit.summary();
        EXPECT_GT(r.audit.strictly_dominant_rows, 0);
        EXPECT_LE(r.audit.max_offdiag, kOffDiagonalTolerance);
    }
}

TEST(Assemble, MismatchedPlansAreRejected) {
    const Problem p = exam1_problem();
    const FieldAnalysis an = analyze_field(p.field());
    const StencilPlans plans = plan_stencils(Grid(10), p.field(), an.lattice, an.constants);
    EXPECT_THROW(assemble(p, Grid(11), plans), AssemblyError);
}

TEST(Audit, NegativeControls) {
    const std::vector<Triplet> positive_off{{0, 0, 2.0}, {0, 1, 0.5}, {1, 0, -1.0}, {1, 1, 2.0}};
    const MMatrixAudit a = audit_m_matrix(make_system(2, positive_off, Vector::Ones(2)));
    EXPECT_FALSE(a.passed);
    EXPECT_EQ(a.sign_violations, 1);
    ASSERT_TRUE(a.witness.has_value());
    EXPECT_EQ(*a.witness, (std::pair{0, 1}));

    const std::vector<Triplet> weak{{0, 0, 1.0}, {0, 1, -2.0}, {1, 0, -1.0}, {1, 1, 2.0}};
    const MMatrixAudit b = audit_m_matrix(make_system(2, weak, Vector::Ones(2)));
    EXPECT_FALSE(b.passed);
    EXPECT_EQ(b.dominance_violations, 1);

    const std::vector<Triplet> split{{0, 0, 1.0}, {1, 1, 1.0}};
    const MMatrixAudit c = audit_m_matrix(make_system(2, split, Vector::Ones(2)));
    EXPECT_FALSE(c.connected);
    EXPECT_FALSE(c.passed);

    const std::vector<Triplet> singular{{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}};
    const MMatrixAudit d = audit_m_matrix(make_system(2, singular, Vector::Ones(2)));
    EXPECT_EQ(d.strictly_dominant_rows, 0);
    EXPECT_FALSE(d.passed);

    const std::vector<Triplet> good{{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}};
    EXPECT_TRUE(audit_m_matrix(make_system(2, good, Vector::Ones(2))).passed);
}

TEST(Problem, BoundaryMismatch) {
    const Problem p = exam2_problem();
    EXPECT_EQ(boundary_mismatch(p, Grid(10)), 0.0);
    const Problem q{"shifted", exam1_field(), Expr::constant(0.0), Expr::parse("x + 1"), Expr::parse("x")};
    EXPECT_DOUBLE_EQ(boundary_mismatch(q, Grid(10)), 1.0);
}
