#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "monodiff/error.hpp"
#include "monodiff/field.hpp"
#include "monodiff/grid.hpp"

namespace monodiff {

/// Admissible-angle bounds over a planning region:
///     A = sup b/a and B = inf c/b over the b > 0 samples,
///     C = sup c/b and D = inf b/a over the b < 0 samples.
/// Samples with b == 0 belong to neither part.
struct AngleIntervals {
    double a_sup = -std::numeric_limits<double>::infinity();
    double b_inf = std::numeric_limits<double>::infinity();
    double c_sup = -std::numeric_limits<double>::infinity();
    double d_inf = std::numeric_limits<double>::infinity();
    bool plus_empty = true;
    bool minus_empty = true;

    void add(const Tensor& t) noexcept {
        if (t.b > 0.0) {
            plus_empty = false;
            a_sup = std::max(a_sup, t.b / t.a);
            b_inf = std::min(b_inf, t.c / t.b);
        } else if (t.b < 0.0) {
            minus_empty = false;
            c_sup = std::max(c_sup, t.c / t.b);
            d_inf = std::min(d_inf, t.b / t.a);
        }
    }

    /// Constraint from gamma0 >= 0 alone (x-axis arm midpoints).
    void add_gamma0(const Tensor& t) noexcept {
        if (t.b > 0.0) {
            plus_empty = false;
            a_sup = std::max(a_sup, t.b / t.a);
        } else if (t.b < 0.0) {
            minus_empty = false;
            d_inf = std::min(d_inf, t.b / t.a);
        }
    }

    /// Constraint from gamma2 >= 0 alone (y-axis arm midpoints).
    void add_gamma2(const Tensor& t) noexcept {
        if (t.b > 0.0) {
            plus_empty = false;
            b_inf = std::min(b_inf, t.c / t.b);
        } else if (t.b < 0.0) {
            minus_empty = false;
            c_sup = std::max(c_sup, t.c / t.b);
        }
    }

    void merge(const AngleIntervals& o) noexcept {
        a_sup = std::max(a_sup, o.a_sup);
        b_inf = std::min(b_inf, o.b_inf);
        c_sup = std::max(c_sup, o.c_sup);
        d_inf = std::min(d_inf, o.d_inf);
        plus_empty = plus_empty && o.plus_empty;
        minus_empty = minus_empty && o.minus_empty;
    }

    [[nodiscard]] bool plus_contains(double tan1) const noexcept { return tan1 > a_sup && tan1 < b_inf; }
    [[nodiscard]] bool minus_contains(double tan2) const noexcept { return tan2 > c_sup && tan2 < d_inf; }
};

inline AngleIntervals angle_intervals(std::span<const Tensor> samples) {
    AngleIntervals r;
    for (const Tensor& t : samples) r.add(t);
    return r;
}

inline AngleIntervals angle_intervals(const DiffusionField& field, std::span<const Point> region) {
    AngleIntervals r;
    for (const Point& p : region) r.add(field.eval(p));
    return r;
}

/// Directions beta1 in (0, pi/2) and beta2 in (-pi/2, 0), stored through the
/// quantities the coefficients need. Built from lattice offsets these are
/// exact ratios: tan = dy/dx and 1/(cos sin) = (dx^2 + dy^2)/(dx dy).
struct SplitAngles {
    double tan1 = 1.0;
    double inv_cs1 = 2.0;
    double tan2 = -1.0;
    double inv_cs2 = -2.0;

    static SplitAngles from_radians(double beta1, double beta2) {
        SplitAngles s;
        s.tan1 = std::tan(beta1);
        s.inv_cs1 = 1.0 / (std::cos(beta1) * std::sin(beta1));
        s.tan2 = std::tan(beta2);
        s.inv_cs2 = 1.0 / (std::cos(beta2) * std::sin(beta2));
        return s;
    }

    static SplitAngles from_offsets(int dx1, int dy1, int dx2, int dy2) {
        SplitAngles s;
        s.tan1 = static_cast<double>(dy1) / dx1;
        s.inv_cs1 = static_cast<double>(dx1 * dx1 + dy1 * dy1) / (dx1 * dy1);
        s.tan2 = static_cast<double>(dy2) / dx2;
        s.inv_cs2 = static_cast<double>(dx2 * dx2 + dy2 * dy2) / (dx2 * dy2);
        return s;
    }

    [[nodiscard]] double beta1() const noexcept { return std::atan(tan1); }
    [[nodiscard]] double beta2() const noexcept { return std::atan(tan2); }
};

struct SplitCoefficients {
    double gamma0 = 0.0;
    double gamma1_plus = 0.0;
    double gamma1_minus = 0.0;
    double gamma2 = 0.0;

    [[nodiscard]] double min() const noexcept { return std::min({gamma0, gamma1_plus, gamma1_minus, gamma2}); }
};

enum class Term { x_axis, plus, minus, y_axis };

[[nodiscard]] inline double select(const SplitCoefficients& s, Term term) noexcept {
    switch (term) {
        case Term::x_axis: return s.gamma0;
        case Term::plus: return s.gamma1_plus;
        case Term::minus: return s.gamma1_minus;
        case Term::y_axis: return s.gamma2;
    }
    return 0.0;
}

inline void check_angle_ranges(const SplitAngles& ang) {
    if (!(ang.tan1 > 0.0 && std::isfinite(ang.tan1))) throw PlanError("beta1 must lie in (0, pi/2)");
    if (!(ang.tan2 < 0.0 && std::isfinite(ang.tan2))) throw PlanError("beta2 must lie in (-pi/2, 0)");
}

/// Four-term splitting at one point. Points with b >= 0 use beta1, points
/// with b < 0 use beta2; b == 0 gives gamma0 = a, gamma2 = c.
[[nodiscard]] inline SplitCoefficients split_unchecked(const Tensor& t, const SplitAngles& ang) noexcept {
    SplitCoefficients s;
    if (t.b >= 0.0) {
        s.gamma0 = t.a - t.b / ang.tan1;
        s.gamma1_plus = t.b * ang.inv_cs1;
        s.gamma2 = t.c - t.b * ang.tan1;
    } else {
        s.gamma0 = t.a - t.b / ang.tan2;
        s.gamma1_minus = t.b * ang.inv_cs2;
        s.gamma2 = t.c - t.b * ang.tan2;
    }
    return s;
}

inline SplitCoefficients split_coefficients(const Tensor& t, const SplitAngles& ang) {
    check_angle_ranges(ang);
    return split_unchecked(t, ang);
}

/// Refuses angles outside the admissible intervals of the enclosing region.
inline SplitCoefficients split_coefficients(const Tensor& t, const SplitAngles& ang, const AngleIntervals& iv) {
    check_angle_ranges(ang);
    if (!iv.plus_empty && !iv.plus_contains(ang.tan1)) {
        std::ostringstream msg;
        msg << "tan(beta1) = " << ang.tan1 << " is outside (" << iv.a_sup << ", " << iv.b_inf << ")";
        throw PlanError(msg.str());
    }
    if (!iv.minus_empty && !iv.minus_contains(ang.tan2)) {
        std::ostringstream msg;
        msg << "tan(beta2) = " << ang.tan2 << " is outside (" << iv.c_sup << ", " << iv.d_inf << ")";
        throw PlanError(msg.str());
    }
    return split_unchecked(t, ang);
}

inline SplitCoefficients split_coefficients(const DiffusionField& field, double beta1, double beta2, double x,
                                            double y) {
    return split_coefficients(field.eval(x, y), SplitAngles::from_radians(beta1, beta2));
}

/// Rebuilds (a, b, c) from the split terms:
///     a = g0 + g1+ cos^2 b1 + g1- cos^2 b2
///     b = g1+ cos b1 sin b1 + g1- cos b2 sin b2
///     c = g1+ sin^2 b1 + g1- sin^2 b2 + g2
[[nodiscard]] inline Tensor reconstruct(const SplitCoefficients& s, const SplitAngles& ang) noexcept {
    const double q1 = 1.0 + ang.tan1 * ang.tan1;
    const double q2 = 1.0 + ang.tan2 * ang.tan2;
    Tensor t;
    t.a = s.gamma0 + s.gamma1_plus / q1 + s.gamma1_minus / q2;
    t.b = s.gamma1_plus * ang.tan1 / q1 + s.gamma1_minus * ang.tan2 / q2;
    t.c = s.gamma1_plus * ang.tan1 * ang.tan1 / q1 + s.gamma1_minus * ang.tan2 * ang.tan2 / q2 + s.gamma2;
    return t;
}

inline constexpr double kGammaTolerance = 1e-12;

struct NonnegativityReport {
    SplitCoefficients minimum{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    std::size_t samples = 0;
    std::optional<Point> witness;  ///< first sample with some gamma below tolerance
    bool passed = true;
};

inline NonnegativityReport verify_nonnegative(const DiffusionField& field, const SplitAngles& ang,
                                              std::span<const Point> region) {
    check_angle_ranges(ang);
    NonnegativityReport r;
    for (const Point& p : region) {
        const SplitCoefficients s = split_unchecked(field.eval(p), ang);
        r.minimum.gamma0 = std::min(r.minimum.gamma0, s.gamma0);
        r.minimum.gamma1_plus = std::min(r.minimum.gamma1_plus, s.gamma1_plus);
        r.minimum.gamma1_minus = std::min(r.minimum.gamma1_minus, s.gamma1_minus);
        r.minimum.gamma2 = std::min(r.minimum.gamma2, s.gamma2);
        ++r.samples;
        if (s.min() < -kGammaTolerance && !r.witness) r.witness = p;
    }
    r.passed = !r.witness.has_value();
    return r;
}

inline NonnegativityReport verify_nonnegative(const DiffusionField& field, double beta1, double beta2,
                                              std::span<const Point> region) {
    return verify_nonnegative(field, SplitAngles::from_radians(beta1, beta2), region);
}

}  // namespace monodiff
