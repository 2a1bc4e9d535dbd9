#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <string>

#include "monodiff/assembly.hpp"
#include "monodiff/error.hpp"

namespace monodiff {

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 0;  ///< 0 selects 10 * dimension
};

struct SolveReport {
    int iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
    std::string method_name;
};

struct SolveResult {
    Vector u;
    SolveReport report;
};

/// ||A u - rhs|| / ||rhs||, or the absolute norm when rhs = 0.
inline double residual(const SparseSystem& sys, const Vector& u) {
    if (u.size() != sys.matrix.cols()) throw SolverError("candidate length does not match the system");
    const double r = (sys.matrix * u - sys.rhs).norm();
    const double b = sys.rhs.norm();
    return b > 0.0 ? r / b : r;
}

/// ILUT-preconditioned BiCGSTAB; falls back to a sparse LU factorisation
/// with one refinement step when the Krylov iteration misses the tolerance.
inline SolveResult solve(const SparseSystem& sys, const SolveOptions& opt = {}) {
    const int dim = sys.dimension();
    if (dim == 0) throw SolverError("empty system");
    if (sys.rhs.size() != dim) throw SolverError("right-hand side length does not match the matrix");
    const int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * dim;

    SolveResult out;
    if (sys.rhs.norm() == 0.0) {
        out.u = Vector::Zero(dim);
        out.report = {0, 0.0, true, "trivial"};
        return out;
    }

    const Eigen::SparseMatrix<double, Eigen::ColMajor, int> a = sys.matrix;
    {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::IncompleteLUT<double, int>> it;
        it.preconditioner().setDroptol(1e-6);
        it.preconditioner().setFillfactor(20);
        it.setTolerance(0.5 * opt.tol);
        it.setMaxIterations(max_iter);
        it.compute(a);
        if (it.info() == Eigen::Success) {
            out.u = it.solve(sys.rhs);
            out.report.iterations = static_cast<int>(it.iterations());
            out.report.method_name = "bicgstab+ilut";
            if (out.u.allFinite()) {
                out.report.final_relative_residual = residual(sys, out.u);
                out.report.converged = out.report.final_relative_residual <= opt.tol;
                if (out.report.converged) return out;
            }
        }
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        if (out.u.size() != dim) out.u = Vector::Zero(dim);
        out.report.final_relative_residual = residual(sys, out.u);
        out.report.converged = false;
        return out;
    }
    Vector u = lu.solve(sys.rhs);
    u += lu.solve(sys.rhs - sys.matrix * u);
    out.u = std::move(u);
    out.report.iterations += 1;
    out.report.method_name = "sparse-lu";
    out.report.final_relative_residual = residual(sys, out.u);
    out.report.converged = out.report.final_relative_residual <= opt.tol;
    return out;
}

}  // namespace monodiff
