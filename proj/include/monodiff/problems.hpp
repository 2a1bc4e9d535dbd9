#pragma once

#include <string>
#include <string_view>

#include "monodiff/assembly.hpp"
#include "monodiff/expression.hpp"
#include "monodiff/field.hpp"
#include "monodiff/verification.hpp"

namespace monodiff {

/// sin(2 pi x) sin(3 pi y)
inline Expr smooth_exact_solution() {
    return Expr::parse("sin(2*pi*x)*sin(3*pi*y)");
}

/// Example 1: f = 0, g = cos(pi x y) + y.
inline Problem exam1_problem() {
    return {"exam1", exam1_field(), Expr::constant(0.0), Expr::parse("cos(pi*x*y) + y")};
}

/// Example 2: the Example 1 operator with a manufactured smooth solution.
inline Problem exam2_problem() { return manufactured_problem(exam1_field(), smooth_exact_solution(), "exam2"); }

inline Problem exam3_problem() { return manufactured_problem(exam3_field(), smooth_exact_solution(), "exam3"); }

inline Problem exam4_problem(double k) {
    return manufactured_problem(exam4_field(k), smooth_exact_solution(), "exam4");
}

inline bool is_builtin_problem(std::string_view name) {
    return name == "exam1" || name == "exam2" || name == "exam3" || name == "exam4";
}

inline Problem builtin_problem(std::string_view name, double k = 10.0) {
    if (name == "exam1") return exam1_problem();
    if (name == "exam2") return exam2_problem();
    if (name == "exam3") return exam3_problem();
    if (name == "exam4") return exam4_problem(k);
    throw Error("unknown built-in problem '" + std::string(name) + "'");
}

}  // namespace monodiff
