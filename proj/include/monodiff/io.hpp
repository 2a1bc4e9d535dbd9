#pragma once

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "monodiff/assembly.hpp"
#include "monodiff/error.hpp"
#include "monodiff/stencil.hpp"
#include "monodiff/verification.hpp"

namespace monodiff {

namespace detail {

struct PrecisionGuard {
    explicit PrecisionGuard(std::ostream& os) : os_(os), flags_(os.flags()), precision_(os.precision()) {
        os_ << std::setprecision(std::numeric_limits<double>::max_digits10);
    }
    ~PrecisionGuard() {
        os_.flags(flags_);
        os_.precision(precision_);
    }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    std::ostream& os_;
    std::ios::fmtflags flags_;
    std::streamsize precision_;
};

}  // namespace detail

inline void write_dmp_csv(std::ostream& os, const std::vector<DmpRow>& rows) {
    detail::PrecisionGuard guard(os);
    os << "N,boundary_min,interior_min,boundary_max,interior_max\n";
    for (const DmpRow& r : rows) {
        os << r.n << ',' << r.boundary_min << ',' << r.interior_min << ',' << r.boundary_max << ','
           << r.interior_max << '\n';
    }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceStudy& study) {
    detail::PrecisionGuard guard(os);
    os << "N,h,max_error,observed_order\n";
    for (const ConvergenceRow& r : study.rows) {
        os << r.n << ',' << r.h << ',' << r.max_error << ',';
        if (r.observed_order) os << *r.observed_order;
        os << '\n';
    }
}

/// (N+1) lines of (N+1) values; line k holds y = k/N, column j holds x = j/N.
inline void write_grid(std::ostream& os, int n_intervals, const std::vector<double>& values) {
    detail::PrecisionGuard guard(os);
    const auto side = static_cast<std::size_t>(n_intervals + 1);
    if (values.size() != side * side) throw Error("grid dump size mismatch");
    for (std::size_t k = 0; k < side; ++k) {
        for (std::size_t j = 0; j < side; ++j) {
            if (j > 0) os << ' ';
            os << values[k * side + j];
        }
        os << '\n';
    }
}

/// One line per interior node: j k m i1 tan1 i2 tan2 clipped. Absent
/// indices print as '-', with the tangent of the diagonal actually used.
inline void write_plan(std::ostream& os, const StencilPlans& plans) {
    detail::PrecisionGuard guard(os);
    os << "j k m i1 tan1 i2 tan2 clipped\n";
    for (const StencilPlan& p : plans.plans) {
        os << p.node.j << ' ' << p.node.k << ' ' << p.m << ' ';
        if (p.i1) os << *p.i1; else os << '-';
        os << ' ' << p.angles.tan1 << ' ';
        if (p.i2) os << *p.i2; else os << '-';
        os << ' ' << p.angles.tan2 << ' ' << p.clipped_arms() << '\n';
    }
}

/// Header "rows cols nnz", then 1-based "row col value" triples.
inline void write_matrix(std::ostream& os, const SparseMatrix& a) {
    detail::PrecisionGuard guard(os);
    os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    for (int row = 0; row < a.outerSize(); ++row) {
        for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
            os << row + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

inline void write_vector(std::ostream& os, const Vector& v) {
    detail::PrecisionGuard guard(os);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

inline SparseMatrix read_matrix(std::istream& is) {
    long rows = 0, cols = 0, nnz = 0;
    if (!(is >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) throw Error("bad matrix header");
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (long i = 0; i < nnz; ++i) {
        long r = 0, c = 0;
        double v = 0.0;
        if (!(is >> r >> c >> v)) throw Error("matrix file ends after " + std::to_string(i) + " entries");
        if (r < 1 || r > rows || c < 1 || c > cols) throw Error("matrix entry index out of range");
        triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
    }
    SparseMatrix a(static_cast<int>(rows), static_cast<int>(cols));
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

inline Vector read_vector(std::istream& is) {
    std::vector<double> vals;
    double v = 0.0;
    while (is >> v) vals.push_back(v);
    if (!is.eof()) throw Error("bad vector file");
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace monodiff
