#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "monodiff/assembly.hpp"
#include "monodiff/error.hpp"
#include "monodiff/expression.hpp"
#include "monodiff/field.hpp"
#include "monodiff/pipeline.hpp"

namespace monodiff {

/// f = -div(D grad u) by symbolic differentiation, g = u.
inline Problem manufactured_problem(const DiffusionField& field, const Expr& u, std::string name = "manufactured") {
    const Expr ux = differentiate(u, 'x');
    const Expr uy = differentiate(u, 'y');
    const Expr flux_x = field.a() * ux + field.b() * uy;
    const Expr flux_y = field.b() * ux + field.c() * uy;
    const Expr f = -(differentiate(flux_x, 'x') + differentiate(flux_y, 'y'));
    return {std::move(name), field, f, u, u};
}

inline constexpr double kDmpTolerance = 1e-12;

struct DmpRow {
    int n = 0;
    double boundary_min = 0.0;
    double interior_min = 0.0;
    double boundary_max = 0.0;
    double interior_max = 0.0;

    [[nodiscard]] bool passed() const noexcept {
        return boundary_min <= interior_min + kDmpTolerance && interior_max <= boundary_max + kDmpTolerance;
    }
};

inline DmpRow dmp_row(const Grid& grid, const Problem& problem, const Vector& u) {
    DmpRow r;
    r.n = grid.intervals();
    r.boundary_min = std::numeric_limits<double>::infinity();
    r.boundary_max = -std::numeric_limits<double>::infinity();
    for (const NodeIndex& b : grid.boundary_nodes()) {
        const double v = problem.g(grid.point(b));
        r.boundary_min = std::min(r.boundary_min, v);
        r.boundary_max = std::max(r.boundary_max, v);
    }
    r.interior_min = u.minCoeff();
    r.interior_max = u.maxCoeff();
    return r;
}

inline void require_converged(const RunResult& run) {
    if (!run.solution.report.converged) {
        throw SolverError("solver did not converge at N = " + std::to_string(run.grid.intervals()) +
                          " (relative residual " + std::to_string(run.solution.report.final_relative_residual) + ")");
    }
}

inline std::vector<DmpRow> dmp_table(const Problem& problem, const FieldAnalysis& analysis,
                                     const std::vector<int>& sizes, const PipelineOptions& options = {}) {
    if (!problem.source().is_closed() || problem.source().eval(0.0, 0.0) != 0.0) {
        throw Error("the maximum-principle table needs f = 0");
    }
    std::vector<DmpRow> rows;
    for (const int n : sizes) {
        const RunResult run = run_problem(problem, analysis, n, options);
        require_converged(run);
        rows.push_back(dmp_row(run.grid, problem, run.solution.u));
    }
    return rows;
}

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double max_error = 0.0;
    std::optional<double> observed_order;
    int max_m = 0;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;  ///< least-squares fit of log(error) against log(h)
};

inline double interior_max_error(const Grid& grid, const Problem& problem, const Vector& u) {
    if (!problem.exact()) throw Error("problem has no exact solution");
    double worst = 0.0;
    for (int i = 0; i < grid.interior_count(); ++i) {
        worst = std::max(worst, std::fabs(u[i] - *problem.exact_at(grid.point(grid.node(i)))));
    }
    return worst;
}

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 2 || xs.size() != ys.size()) throw Error("slope fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline ConvergenceRow convergence_row(const RunResult& run, const Problem& problem) {
    ConvergenceRow row;
    row.n = run.grid.intervals();
    row.h = run.grid.spacing();
    row.max_error = interior_max_error(run.grid, problem, run.solution.u);
    row.max_m = run.plans.max_m;
    return row;
}

/// Fills the pairwise observed orders and the fitted slope.
inline ConvergenceStudy summarize_convergence(std::vector<ConvergenceRow> rows) {
    ConvergenceStudy study;
    std::vector<double> lh, le;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            rows[i].observed_order = std::log(rows[i - 1].max_error / rows[i].max_error) /
                                     std::log(rows[i - 1].h / rows[i].h);
        }
        lh.push_back(std::log(rows[i].h));
        le.push_back(std::log(rows[i].max_error));
    }
    study.slope = least_squares_slope(lh, le);
    study.rows = std::move(rows);
    return study;
}

inline void check_study_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2 || !std::is_sorted(sizes.begin(), sizes.end()) ||
        std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
        throw Error("convergence study needs at least two strictly increasing grid sizes");
    }
}

inline ConvergenceStudy convergence_study(const Problem& problem, const FieldAnalysis& analysis,
                                          const std::vector<int>& sizes, const PipelineOptions& options = {}) {
    if (!problem.exact()) throw Error("convergence study needs an exact solution");
    check_study_sizes(sizes);
    std::vector<ConvergenceRow> rows;
    for (const int n : sizes) {
        const RunResult run = run_problem(problem, analysis, n, options);
        require_converged(run);
        rows.push_back(convergence_row(run, problem));
    }
    return summarize_convergence(std::move(rows));
}

struct SignPattern {
    long positive_diagonal = 0;
    long nonpositive_offdiag = 0;
    long violations = 0;

    [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};

inline SignPattern sign_pattern_summary(const SparseSystem& sys) {
    SignPattern s;
    const SparseMatrix& a = sys.matrix;
    for (int row = 0; row < a.rows(); ++row) {
        bool has_diag = false;
        for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
            if (it.col() == row) {
                has_diag = true;
                if (it.value() > 0.0) ++s.positive_diagonal;
                else ++s.violations;
            } else if (it.value() <= kOffDiagonalTolerance) {
                ++s.nonpositive_offdiag;
            } else {
                ++s.violations;
            }
        }
        if (!has_diag) ++s.violations;
    }
    return s;
}

}  // namespace monodiff
