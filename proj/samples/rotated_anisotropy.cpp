// Solves -div(D grad u) = f for a rotated anisotropic tensor given by
// inline expressions, then checks the maximum principle and the error.
//
//   sample_rotated_anisotropy [N]

#include <cstdlib>
#include <iostream>

#include "monodiff/monodiff.hpp"

int main(int argc, char** argv) {
    using namespace monodiff;
    const int n = argc > 1 ? std::atoi(argv[1]) : 40;

    // diag(4, 1) rotated by theta = pi/6 + x/2
    const DiffusionField field = DiffusionField::from_strings(
        "rotated", "4*cos(pi/6 + x/2)^2 + sin(pi/6 + x/2)^2", "3*cos(pi/6 + x/2)*sin(pi/6 + x/2)",
        "4*sin(pi/6 + x/2)^2 + cos(pi/6 + x/2)^2");
    const Problem problem = manufactured_problem(field, Expr::parse("exp(x)*sin(pi*y)"), "rotated");

    const FieldAnalysis analysis = analyze_field(field);
    const SplittingConstants& k = analysis.constants;
    std::cout << "alpha_bar = " << k.alpha_bar << ", alpha = " << k.alpha << ", R = " << k.radius
              << ", stencil bound m <= " << stencil_upper_bound(k) << "\n";

    const RunResult run = run_problem(problem, analysis, n);
    std::cout << "N = " << n << ": max m = " << run.plans.max_m << ", audit " << (run.audit.passed ? "pass" : "fail")
              << ", " << run.solution.report.method_name << " residual " << run.solution.report.final_relative_residual
              << "\n";
    std::cout << "max error = " << interior_max_error(run.grid, problem, run.solution.u) << "\n";

    const Problem harmonic{"rotated-dmp", field, Expr::constant(0.0), Expr::parse("cos(3*x)*exp(-y)")};
    const RunResult dmp_run = run_problem(harmonic, analysis, n);
    const DmpRow row = dmp_row(dmp_run.grid, harmonic, dmp_run.solution.u);
    std::cout << "f = 0: interior [" << row.interior_min << ", " << row.interior_max << "] within boundary ["
              << row.boundary_min << ", " << row.boundary_max << "]: " << (row.passed() ? "yes" : "no") << "\n";
    return row.passed() && run.audit.passed ? EXIT_SUCCESS : EXIT_FAILURE;
}
