#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monodiff/error.hpp"
#include "monodiff/expression.hpp"
#include "monodiff/field.hpp"
#include "monodiff/grid.hpp"
#include "monodiff/splitting.hpp"
#include "monodiff/stencil.hpp"

namespace monodiff {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// Interior-node system A u = rhs in compressed-row form, rows in the grid's
/// row-major interior order, Dirichlet data already folded into rhs.
struct SparseSystem {
    int n_intervals = 0;
    SparseMatrix matrix;
    Vector rhs;

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(matrix.rows()); }
    [[nodiscard]] Eigen::Index nonzeros() const noexcept { return matrix.nonZeros(); }
};

/// -div(D grad u) = f in the unit square, u = g on its boundary.
class Problem {
public:
    Problem(std::string name, DiffusionField field, Expr f, Expr g, std::optional<Expr> exact = std::nullopt)
        : name_(std::move(name)),
          field_(std::move(field)),
          f_(std::move(f)),
          g_(std::move(g)),
          exact_(std::move(exact)),
          cf_(f_),
          cg_(g_) {
        if (exact_) cexact_ = CompiledExpr(*exact_);
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const DiffusionField& field() const noexcept { return field_; }
    [[nodiscard]] const Expr& source() const noexcept { return f_; }
    [[nodiscard]] const Expr& boundary() const noexcept { return g_; }
    [[nodiscard]] const std::optional<Expr>& exact() const noexcept { return exact_; }

    [[nodiscard]] double f(Point p) const { return cf_(p.x, p.y); }
    [[nodiscard]] double g(Point p) const { return cg_(p.x, p.y); }
    [[nodiscard]] std::optional<double> exact_at(Point p) const {
        if (!cexact_) return std::nullopt;
        return (*cexact_)(p.x, p.y);
    }

private:
    std::string name_;
    DiffusionField field_;
    Expr f_, g_;
    std::optional<Expr> exact_;
    CompiledExpr cf_, cg_;
    std::optional<CompiledExpr> cexact_;
};

/// Largest |g - exact| over the boundary nodes; 0 without an exact solution.
inline double boundary_mismatch(const Problem& problem, const Grid& grid) {
    double worst = 0.0;
    if (!problem.exact()) return worst;
    for (const NodeIndex& b : grid.boundary_nodes()) {
        const Point p = grid.point(b);
        worst = std::max(worst, std::fabs(problem.g(p) - *problem.exact_at(p)));
    }
    return worst;
}

/// Row weights of -d/ds(gamma du/ds) on three collinear points with arm
/// lengths s_plus, s_minus and gamma sampled at the arm midpoints.
struct ThreePoint {
    double center = 0.0;
    double plus = 0.0;
    double minus = 0.0;
};

inline ThreePoint directional_term_row(double gamma_plus, double gamma_minus, double s_plus, double s_minus) {
    if (gamma_plus < -kGammaTolerance || gamma_minus < -kGammaTolerance) {
        std::ostringstream msg;
        msg << "negative splitting coefficient at an arm midpoint (" << std::min(gamma_plus, gamma_minus) << ")";
        throw AssemblyError(msg.str());
    }
    if (!(s_plus > 0.0) || !(s_minus > 0.0)) throw AssemblyError("arm lengths must be positive");
    gamma_plus = std::max(gamma_plus, 0.0);
    gamma_minus = std::max(gamma_minus, 0.0);
    const double span = s_plus + s_minus;
    ThreePoint w;
    w.plus = -2.0 * gamma_plus / (s_plus * span);
    w.minus = -2.0 * gamma_minus / (s_minus * span);
    w.center = 2.0 * (gamma_plus / s_plus + gamma_minus / s_minus) / span;
    return w;
}

/// Sums the four directional terms per interior node: x axis with gamma0,
/// the beta1 direction with gamma1+, the beta2 direction with gamma1-, and
/// the y axis with gamma2. Ends on the boundary (nodes or clipped crossings)
/// are evaluated with g and moved to the right-hand side.
inline SparseSystem assemble(const Problem& problem, const Grid& grid, const StencilPlans& plans) {
    if (plans.n_intervals != grid.intervals() || static_cast<int>(plans.plans.size()) != grid.interior_count()) {
        throw AssemblyError("stencil plans do not match the grid");
    }
    const DiffusionField& field = problem.field();
    const int dim = grid.interior_count();
    SparseSystem sys;
    sys.n_intervals = grid.intervals();
    sys.rhs = Vector::Zero(dim);
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(static_cast<std::size_t>(dim) * 9);

    const double h = grid.spacing();
    for (int row = 0; row < dim; ++row) {
        const StencilPlan& plan = plans.plans[static_cast<std::size_t>(row)];
        const NodeIndex node = grid.node(row);
        if (!(plan.node == node)) throw AssemblyError("plan order does not follow the interior numbering");
        const Point c = grid.point(node);
        sys.rhs[row] += problem.f(c);

        double diag = 0.0;
        const auto end_weight = [&](const ArmEnd& end, double w) {
            if (w == 0.0) return;
            if (end.node && grid.is_interior(*end.node)) {
                triplets.emplace_back(row, *grid.linear(*end.node), w);
            } else {
                sys.rhs[row] -= w * problem.g(end.point);
            }
        };
        const auto add_term = [&](Term term, const ArmEnd& plus, const ArmEnd& minus) {
            double gp = 0.0;
            double gm = 0.0;
            try {
                gp = select(split_unchecked(field.eval(plus.midpoint), plan.angles), term);
                gm = select(split_unchecked(field.eval(minus.midpoint), plan.angles), term);
                const ThreePoint w = directional_term_row(gp, gm, plus.length, minus.length);
                diag += w.center;
                end_weight(plus, w.plus);
                end_weight(minus, w.minus);
            } catch (const AssemblyError& e) {
                throw AssemblyError(std::string(e.what()) + " at node (" + std::to_string(node.j) + ", " +
                                    std::to_string(node.k) + ")");
            }
        };
        const auto axis = [&](int dx, int dy) {
            ArmEnd e;
            e.node = NodeIndex{node.j + dx, node.k + dy};
            e.point = grid.point(*e.node);
            e.midpoint = {0.5 * (c.x + e.point.x), 0.5 * (c.y + e.point.y)};
            e.length = h;
            return e;
        };
        add_term(Term::x_axis, axis(1, 0), axis(-1, 0));
        add_term(Term::plus, plan.arm1_plus, plan.arm1_minus);
        add_term(Term::minus, plan.arm2_plus, plan.arm2_minus);
        add_term(Term::y_axis, axis(0, 1), axis(0, -1));
        triplets.emplace_back(row, row, diag);
    }
    sys.matrix.resize(dim, dim);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

/// Builds the system from raw triplets (used by import and tests).
inline SparseSystem make_system(int dim, const std::vector<Eigen::Triplet<double, int>>& triplets, Vector rhs) {
    if (rhs.size() != dim) throw SolverError("right-hand side length does not match the matrix");
    SparseSystem sys;
    sys.matrix.resize(dim, dim);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    sys.rhs = std::move(rhs);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
    sys.n_intervals = side * side == dim ? side + 1 : 0;
    return sys;
}

inline constexpr double kOffDiagonalTolerance = 1e-12;

/// Sufficient M-matrix certificate: Z-pattern, positive diagonal, weak row
/// dominance with at least one strictly dominant row, and a strongly
/// connected off-diagonal graph (irreducibility).
struct MMatrixAudit {
    double max_offdiag = -std::numeric_limits<double>::infinity();
    double min_diag = std::numeric_limits<double>::infinity();
    double min_dominance_slack = std::numeric_limits<double>::infinity();  ///< (diag - sum|off|) / diag
    int strictly_dominant_rows = 0;
    int sign_violations = 0;
    int dominance_violations = 0;
    bool connected = false;
    std::optional<std::pair<int, int>> witness;  ///< first offending (row, col)
    bool passed = false;

    [[nodiscard]] std::string summary() const {
        std::ostringstream s;
        s << "max_offdiag=" << max_offdiag << " min_diag=" << min_diag << " min_dominance_slack=" << min_dominance_slack
          << " strict_rows=" << strictly_dominant_rows << " connected=" << (connected ? "yes" : "no")
          << " verdict=" << (passed ? "pass" : "fail");
        if (witness) s << " witness=(" << witness->first + 1 << ", " << witness->second + 1 << ")";
        return s.str();
    }
};

namespace detail {

inline int reach_count(const SparseMatrix& a) {
    const auto n = static_cast<int>(a.rows());
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int r = stack.back();
        stack.pop_back();
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            const int c = static_cast<int>(it.col());
            if (c == r || it.value() == 0.0 || seen[static_cast<std::size_t>(c)]) continue;
            seen[static_cast<std::size_t>(c)] = 1;
            ++count;
            stack.push_back(c);
        }
    }
    return count;
}

}  // namespace detail

inline MMatrixAudit audit_m_matrix(const SparseSystem& sys) {
    constexpr double relative_slack = 1e-10;
    MMatrixAudit r;
    const SparseMatrix& a = sys.matrix;
    const auto n = static_cast<int>(a.rows());
    for (int row = 0; row < n; ++row) {
        double diag = 0.0;
        double off = 0.0;
        for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
            const int col = static_cast<int>(it.col());
            if (col == row) {
                diag += it.value();
                continue;
            }
            r.max_offdiag = std::max(r.max_offdiag, it.value());
            off += std::fabs(it.value());
            if (it.value() > kOffDiagonalTolerance) {
                ++r.sign_violations;
                if (!r.witness) r.witness = std::pair{row, col};
            }
        }
        r.min_diag = std::min(r.min_diag, diag);
        if (!(diag > 0.0)) {
            ++r.sign_violations;
            if (!r.witness) r.witness = std::pair{row, row};
            continue;
        }
        const double slack = (diag - off) / diag;
        r.min_dominance_slack = std::min(r.min_dominance_slack, slack);
        if (slack < -relative_slack) {
            ++r.dominance_violations;
            if (!r.witness) r.witness = std::pair{row, row};
        }
        if (slack > relative_slack) ++r.strictly_dominant_rows;
    }
    if (n > 0) {
        const SparseMatrix at = a.transpose();
        r.connected = detail::reach_count(a) == n && detail::reach_count(at) == n;
    }
    r.passed = n > 0 && r.sign_violations == 0 && r.dominance_violations == 0 && r.strictly_dominant_rows > 0 &&
               r.connected;
    return r;
}

}  // namespace monodiff
