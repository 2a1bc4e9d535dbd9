#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monodiff/error.hpp"
#include "monodiff/field.hpp"
#include "monodiff/grid.hpp"
#include "monodiff/splitting.hpp"

namespace monodiff {

/// Lattice step in node units.
struct Offset {
    int dx = 0;
    int dy = 0;

    [[nodiscard]] double tan() const noexcept { return static_cast<double>(dy) / dx; }
    [[nodiscard]] double norm() const noexcept { return std::sqrt(static_cast<double>(dx * dx + dy * dy)); }
};

inline bool operator==(const Offset& p, const Offset& q) { return p.dx == q.dx && p.dy == q.dy; }

struct Direction {
    int index = 0;
    Offset offset;
    double angle = 0.0;  ///< in (-pi/2, pi/2]
};

/// The 4m directions from the centre of a (2m+1) x (2m+1) stencil to its
/// outer ring, indexed by i in -2m+1..2m:
///     |i| <= m           offset (m, i),        tan = i/m
///     m < i <= 2m        offset (2m - i, m),   tan = m/(2m - i)   (i = 2m vertical)
///     -2m < i < -m       offset (2m + i, -m),  tan = m/(-2m - i)
struct PrincipalDirections {
    int half_width = 0;
    std::vector<Direction> directions;
};

inline Offset direction_offset(int m, int i) {
    if (m < 1) throw PlanError("stencil half-width must be at least 1");
    if (i >= -m && i <= m) return {m, i};
    if (i > m && i <= 2 * m) return {2 * m - i, m};
    if (i > -2 * m && i < -m) return {2 * m + i, -m};
    throw PlanError("direction index " + std::to_string(i) + " out of range for m = " + std::to_string(m));
}

inline PrincipalDirections principal_directions(int m) {
    if (m < 1) throw PlanError("stencil half-width must be at least 1");
    PrincipalDirections pd;
    pd.half_width = m;
    for (int i = -2 * m + 1; i <= 2 * m; ++i) {
        const Offset o = direction_offset(m, i);
        pd.directions.push_back({i, o, std::atan2(static_cast<double>(o.dy), static_cast<double>(o.dx))});
    }
    return pd;
}

/// floor(3 alpha / alpha_bar) + 1
inline int stencil_upper_bound(const SplittingConstants& k) {
    return static_cast<int>(std::floor(3.0 * k.alpha / k.alpha_bar)) + 1;
}

namespace detail {

/// Integer in the open interval (lo, hi) closest to its midpoint (ties to
/// smaller magnitude) that also passes `accept`.
template <class Accept>
std::optional<int> pick_integer(double lo, double hi, Accept accept) {
    if (!(hi > lo)) return std::nullopt;
    const double mid = 0.5 * (lo + hi);
    std::optional<int> best;
    double best_gap = 0.0;
    for (int q = static_cast<int>(std::floor(lo)); q <= static_cast<int>(std::ceil(hi)); ++q) {
        if (!(q > lo && q < hi) || !accept(q)) continue;
        const double gap = std::fabs(q - mid);
        if (!best || gap < best_gap || (gap == best_gap && std::abs(q) < std::abs(*best))) {
            best = q;
            best_gap = gap;
        }
    }
    return best;
}

}  // namespace detail

/// Direction index i1 with tan in (A, B) for half-width m, if one exists.
inline std::optional<int> select_plus(double a_sup, double b_inf, int m) {
    const auto inside = [&](double t) { return t > a_sup && t < b_inf; };
    if (a_sup < 1.0 && 1.0 < b_inf) return m;
    if (b_inf <= 1.0) {
        return detail::pick_integer(m * a_sup, m * b_inf,
                                    [&](int i) { return i >= 1 && i <= m && inside(static_cast<double>(i) / m); });
    }
    const auto q = detail::pick_integer(m / b_inf, m / a_sup, [&](int q) {
        return q >= 1 && q < m && inside(static_cast<double>(m) / q);
    });
    if (!q) return std::nullopt;
    return 2 * m - *q;
}

/// Direction index i2 with tan in (C, D) for half-width m, if one exists.
inline std::optional<int> select_minus(double c_sup, double d_inf, int m) {
    const auto inside = [&](double t) { return t > c_sup && t < d_inf; };
    if (c_sup < -1.0 && -1.0 < d_inf) return -m;
    if (c_sup >= -1.0) {
        return detail::pick_integer(m * c_sup, m * d_inf,
                                    [&](int i) { return i <= -1 && i >= -m && inside(static_cast<double>(i) / m); });
    }
    const auto q = detail::pick_integer(m / d_inf, m / c_sup, [&](int q) {
        return q <= -1 && q > -m && inside(static_cast<double>(m) / q);
    });
    if (!q) return std::nullopt;
    return -2 * m - *q;
}

struct StencilChoice {
    int m = 1;
    std::optional<int> i1;  ///< absent when the b > 0 part is empty
    std::optional<int> i2;  ///< absent when the b < 0 part is empty
};

inline std::optional<StencilChoice> select_stencil_fixed(const AngleIntervals& iv, int m) {
    StencilChoice c{m, std::nullopt, std::nullopt};
    if (!iv.plus_empty) {
        c.i1 = select_plus(iv.a_sup, iv.b_inf, m);
        if (!c.i1) return std::nullopt;
    }
    if (!iv.minus_empty) {
        c.i2 = select_minus(iv.c_sup, iv.d_inf, m);
        if (!c.i2) return std::nullopt;
    }
    return c;
}

/// Smallest m <= m_cap for which both sign parts admit a direction.
inline std::optional<StencilChoice> select_stencil(const AngleIntervals& iv, int m_cap) {
    for (int m = 1; m <= m_cap; ++m) {
        if (auto c = select_stencil_fixed(iv, m)) return c;
    }
    return std::nullopt;
}

struct MeshCondition {
    double lhs = 0.0;  ///< sqrt(2) h max m
    double radius = 0.0;
    double slack = 0.0;
    bool passed = false;
};

inline MeshCondition check_mesh_condition(const Grid& grid, int max_m, const SplittingConstants& k) {
    MeshCondition r;
    r.lhs = std::sqrt(2.0) * grid.spacing() * max_m;
    r.radius = k.radius;
    r.slack = r.radius - r.lhs;
    r.passed = r.lhs <= r.radius;
    return r;
}

/// End of one arm of a directional difference. Arms that leave the closed
/// square stop at the boundary crossing; `fraction` is the kept share of
/// the full lattice offset.
struct ArmEnd {
    Point point;
    double length = 0.0;
    double fraction = 1.0;
    Point midpoint;
    std::optional<NodeIndex> node;  ///< set when the end is a mesh node
    bool clipped = false;
};

inline ArmEnd clip_arm(const Grid& grid, NodeIndex center, Offset step) {
    if (!grid.is_interior(center)) throw PlanError("arms are only built from interior nodes");
    if (step.dx == 0 && step.dy == 0) throw PlanError("zero arm offset");
    const int n = grid.intervals();
    // fraction = num / den, kept rational so lattice hits are detected exactly
    long num = 1;
    long den = 1;
    const auto limit = [&](int pos, int d) {
        if (d == 0) return;
        const long room = d > 0 ? n - pos : pos;
        const long reach = std::abs(d);
        if (room < reach && room * den < num * reach) {
            num = room;
            den = reach;
        }
    };
    limit(center.j, step.dx);
    limit(center.k, step.dy);
    const long g = std::gcd(num, den);
    num /= g;
    den /= g;

    ArmEnd e;
    e.fraction = static_cast<double>(num) / static_cast<double>(den);
    e.clipped = num != den;
    const long ex = center.j * den + num * step.dx;
    const long ey = center.k * den + num * step.dy;
    const double scale = static_cast<double>(den) * n;
    e.point = {static_cast<double>(ex) / scale, static_cast<double>(ey) / scale};
    e.midpoint = {static_cast<double>(2 * center.j * den + num * step.dx) / (2.0 * scale),
                  static_cast<double>(2 * center.k * den + num * step.dy) / (2.0 * scale)};
    if (ex % den == 0 && ey % den == 0) e.node = NodeIndex{static_cast<int>(ex / den), static_cast<int>(ey / den)};
    e.length = e.fraction * step.norm() * grid.spacing();
    return e;
}

inline ArmEnd clip_arm(const Grid& grid, NodeIndex center, Offset step, int m) {
    if (std::max(std::abs(step.dx), std::abs(step.dy)) != m) {
        throw PlanError("offset is not on the outer ring of the m = " + std::to_string(m) + " stencil");
    }
    return clip_arm(grid, center, step);
}

struct StencilPlan {
    NodeIndex node;
    int m = 1;
    std::optional<int> i1;
    std::optional<int> i2;
    Offset dir1{1, 1};   ///< direction used for the gamma1+ term
    Offset dir2{1, -1};  ///< direction used for the gamma1- term
    SplitAngles angles;
    AngleIntervals intervals;
    ArmEnd arm1_plus, arm1_minus, arm2_plus, arm2_minus;

    [[nodiscard]] int clipped_arms() const noexcept {
        return static_cast<int>(arm1_plus.clipped) + static_cast<int>(arm1_minus.clipped) +
               static_cast<int>(arm2_plus.clipped) + static_cast<int>(arm2_minus.clipped);
    }
};

/// Builds the plan for one node from its chosen stencil. Empty sign parts
/// fall back to the diagonal of the chosen ring.
inline StencilPlan make_plan(const Grid& grid, NodeIndex node, const StencilChoice& choice,
                             const AngleIntervals& iv) {
    StencilPlan p;
    p.node = node;
    p.m = choice.m;
    p.i1 = choice.i1;
    p.i2 = choice.i2;
    p.dir1 = direction_offset(choice.m, choice.i1.value_or(choice.m));
    p.dir2 = direction_offset(choice.m, choice.i2.value_or(-choice.m));
    p.angles = SplitAngles::from_offsets(p.dir1.dx, p.dir1.dy, p.dir2.dx, p.dir2.dy);
    if ((!iv.plus_empty && !iv.plus_contains(p.angles.tan1)) ||
        (!iv.minus_empty && !iv.minus_contains(p.angles.tan2))) {
        throw PlanError("selected direction is not strictly inside its angle interval at node (" +
                        std::to_string(node.j) + ", " + std::to_string(node.k) + ")");
    }
    p.intervals = iv;
    p.arm1_plus = clip_arm(grid, node, p.dir1);
    p.arm1_minus = clip_arm(grid, node, {-p.dir1.dx, -p.dir1.dy});
    p.arm2_plus = clip_arm(grid, node, p.dir2);
    p.arm2_minus = clip_arm(grid, node, {-p.dir2.dx, -p.dir2.dy});
    return p;
}

struct PlanOptions {
    std::optional<int> fixed_m;
    /// Lattice samples per ball radius before strided sampling kicks in.
    int max_samples_per_radius = 64;
};

struct StencilPlans {
    int n_intervals = 0;
    int m_cap = 0;
    int max_m = 0;
    double radius = 0.0;
    std::map<int, int> m_histogram;
    std::vector<StencilPlan> plans;  ///< row-major interior order

    [[nodiscard]] const StencilPlan& at(const Grid& grid, NodeIndex node) const {
        return plans.at(static_cast<std::size_t>(grid.linear(node).value()));
    }
};

/// Samples of D that decide the angle intervals of each node: probe-lattice
/// points, mesh nodes and mesh-edge midpoints inside the open ball of radius
/// R, plus the node itself and its four axis-edge midpoints (where the axis
/// coefficients are evaluated even when R < h/2).
class PlanningRegion {
public:
    PlanningRegion(const Grid& grid, const DiffusionField& field, const ProbeLattice& lattice, double radius,
                   int max_samples_per_radius = 64)
        : grid_(grid), field_(field), lattice_(lattice), radius_(radius) {
        const double s = lattice.step();
        probe_stride_ = std::max(1, static_cast<int>(std::ceil(radius / s / max_samples_per_radius)));
        const int hn = 2 * grid.intervals();
        half_stride_ = std::max(1, static_cast<int>(std::ceil(radius * hn / max_samples_per_radius)));
        if (radius > 0.5 * grid.spacing()) {
            half_.resize(static_cast<std::size_t>(hn + 1) * static_cast<std::size_t>(hn + 1));
            for (int q = 0; q <= hn; ++q) {
                for (int p = 0; p <= hn; ++p) half_[half_index(p, q)] = field.eval_unchecked(half_coord(p), half_coord(q));
            }
        }
        global_ = radius >= std::sqrt(2.0);
        if (global_) {
            for (const Tensor& t : lattice.values()) whole_.add(t);
            for (int q = 0; q <= hn; ++q) {
                for (int p = 0; p <= hn; ++p) {
                    if (p % 2 == 1 && q % 2 == 1) continue;
                    whole_.add(half_[half_index(p, q)]);
                }
            }
        }
    }

    [[nodiscard]] AngleIntervals intervals(NodeIndex node) const {
        if (global_) return whole_;
        AngleIntervals iv;
        const Point c = grid_.point(node);
        const double r2 = radius_ * radius_;

        const int n = lattice_.intervals();
        const double s = lattice_.step();
        const auto range = [&](double centre, int stride, int count, double step) {
            int lo = static_cast<int>(std::ceil((centre - radius_) / step));
            int hi = static_cast<int>(std::floor((centre + radius_) / step));
            lo = std::max(0, lo);
            hi = std::min(count, hi);
            lo = (lo + stride - 1) / stride * stride;
            return std::pair{lo, hi};
        };
        {
            const auto [jlo, jhi] = range(c.x, probe_stride_, n, s);
            const auto [klo, khi] = range(c.y, probe_stride_, n, s);
            for (int k = klo; k <= khi; k += probe_stride_) {
                const double dy = lattice_.coord(k) - c.y;
                for (int j = jlo; j <= jhi; j += probe_stride_) {
                    const double dx = lattice_.coord(j) - c.x;
                    if (dx * dx + dy * dy < r2) iv.add(lattice_.at(j, k));
                }
            }
        }
        if (!half_.empty()) {
            const int hn = 2 * grid_.intervals();
            const double hs = 1.0 / hn;
            const auto [plo, phi] = range(c.x, half_stride_, hn, hs);
            const auto [qlo, qhi] = range(c.y, half_stride_, hn, hs);
            for (int q = qlo; q <= qhi; q += half_stride_) {
                const double dy = half_coord(q) - c.y;
                for (int p = plo; p <= phi; p += half_stride_) {
                    if (p % 2 == 1 && q % 2 == 1) continue;
                    const double dx = half_coord(p) - c.x;
                    if (dx * dx + dy * dy < r2) iv.add(half_[half_index(p, q)]);
                }
            }
        }
        const std::vector<Point> own = own_points(node);
        iv.add(field_.eval(own[0]));
        iv.add_gamma0(field_.eval(own[1]));
        iv.add_gamma0(field_.eval(own[2]));
        iv.add_gamma2(field_.eval(own[3]));
        iv.add_gamma2(field_.eval(own[4]));
        return iv;
    }

    /// The node and its four axis-edge midpoints.
    [[nodiscard]] std::vector<Point> own_points(NodeIndex node) const {
        const int hn = 2 * grid_.intervals();
        const int p = 2 * node.j;
        const int q = 2 * node.k;
        const auto at = [&](int a, int b) { return Point{static_cast<double>(a) / hn, static_cast<double>(b) / hn}; };
        return {at(p, q), at(p + 1, q), at(p - 1, q), at(p, q + 1), at(p, q - 1)};
    }

    [[nodiscard]] bool global() const noexcept { return global_; }

private:
    [[nodiscard]] double half_coord(int p) const noexcept {
        return static_cast<double>(p) / static_cast<double>(2 * grid_.intervals());
    }
    [[nodiscard]] std::size_t half_index(int p, int q) const noexcept {
        return static_cast<std::size_t>(q) * static_cast<std::size_t>(2 * grid_.intervals() + 1) +
               static_cast<std::size_t>(p);
    }

    const Grid& grid_;
    const DiffusionField& field_;
    const ProbeLattice& lattice_;
    double radius_;
    int probe_stride_ = 1;
    int half_stride_ = 1;
    bool global_ = false;
    AngleIntervals whole_;
    std::vector<Tensor> half_;
};

/// Plans every interior node. Throws PlanError listing the first failing
/// nodes when some node admits no stencil with m <= floor(3 alpha/alpha_bar)+1.
inline StencilPlans plan_stencils(const Grid& grid, const DiffusionField& field, const ProbeLattice& lattice,
                                  const SplittingConstants& constants, const PlanOptions& options = {}) {
    if (options.fixed_m && *options.fixed_m < 1) throw PlanError("fixed stencil half-width must be at least 1");
    StencilPlans out;
    out.n_intervals = grid.intervals();
    out.m_cap = stencil_upper_bound(constants);
    out.radius = constants.radius;
    out.plans.reserve(static_cast<std::size_t>(grid.interior_count()));

    const PlanningRegion region(grid, field, lattice, constants.radius, options.max_samples_per_radius);
    std::ostringstream failures;
    int failed = 0;
    for (int idx = 0; idx < grid.interior_count(); ++idx) {
        const NodeIndex node = grid.node(idx);
        const AngleIntervals iv = region.intervals(node);
        const auto choice = options.fixed_m ? select_stencil_fixed(iv, *options.fixed_m)
                                            : select_stencil(iv, out.m_cap);
        if (!choice) {
            if (failed < 5) {
                failures << "\n  node (" << node.j << ", " << node.k << "): A = " << iv.a_sup
                         << ", B = " << iv.b_inf << ", C = " << iv.c_sup << ", D = " << iv.d_inf;
            }
            ++failed;
            continue;
        }
        out.plans.push_back(make_plan(grid, node, *choice, iv));
        out.max_m = std::max(out.max_m, choice->m);
        ++out.m_histogram[choice->m];
    }
    if (failed > 0) {
        std::ostringstream msg;
        msg << "no admissible stencil at " << failed << " node(s) with m "
            << (options.fixed_m ? "= " + std::to_string(*options.fixed_m) : "<= " + std::to_string(out.m_cap))
            << failures.str();
        throw PlanError(msg.str());
    }
    return out;
}

}  // namespace monodiff
