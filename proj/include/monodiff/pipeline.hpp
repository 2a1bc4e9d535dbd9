#pragma once

#include <sstream>
#include <vector>

#include "monodiff/assembly.hpp"
#include "monodiff/error.hpp"
#include "monodiff/field.hpp"
#include "monodiff/grid.hpp"
#include "monodiff/solver.hpp"
#include "monodiff/stencil.hpp"

namespace monodiff {

/// Probe samples and splitting constants of one field; shared by every grid
/// size planned for that field.
struct FieldAnalysis {
    ProbeLattice lattice;
    SplittingConstants constants;
};

inline FieldAnalysis analyze_field(const DiffusionField& field, double probe_step = kDefaultProbeStep,
                                   double safety = kDefaultSafety) {
    ProbeLattice lattice(field, probe_step);
    SplittingConstants constants = compute_constants(lattice, safety);
    return {std::move(lattice), constants};
}

struct PipelineOptions {
    PlanOptions plan;
    SolveOptions solve;
    bool require_mesh_condition = false;
    bool require_audit = true;
};

struct RunResult {
    Grid grid;
    StencilPlans plans;
    MeshCondition mesh;
    SparseSystem system;
    MMatrixAudit audit;
    SolveResult solution;
};

/// Plan, assemble, audit and solve one grid size. Solver non-convergence is
/// reported, not thrown.
inline RunResult run_problem(const Problem& problem, const FieldAnalysis& analysis, int n_intervals,
                             const PipelineOptions& options = {}) {
    Grid grid(n_intervals);
    StencilPlans plans = plan_stencils(grid, problem.field(), analysis.lattice, analysis.constants, options.plan);
    const MeshCondition mesh = check_mesh_condition(grid, plans.max_m, analysis.constants);
    if (options.require_mesh_condition && !mesh.passed) {
        std::ostringstream msg;
        msg << "mesh condition fails: sqrt(2) h max m = " << mesh.lhs << " > R = " << mesh.radius;
        throw PlanError(msg.str());
    }
    SparseSystem system = assemble(problem, grid, plans);
    const MMatrixAudit audit = audit_m_matrix(system);
    if (options.require_audit && !audit.passed) throw AuditError("M-matrix audit failed: " + audit.summary());
    SolveResult solution = solve(system, options.solve);
    return {grid, std::move(plans), mesh, std::move(system), audit, std::move(solution)};
}

/// Solution on all (N+1)^2 nodes, row-major from (0, 0), boundary values
/// taken from g.
inline std::vector<double> solution_grid(const Grid& grid, const Problem& problem, const Vector& u) {
    const int n = grid.intervals();
    std::vector<double> out(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j) {
            const NodeIndex node{j, k};
            const auto idx = static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(j);
            const auto lin = grid.linear(node);
            out[idx] = lin ? u[*lin] : problem.g(grid.point(node));
        }
    }
    return out;
}

}  // namespace monodiff
