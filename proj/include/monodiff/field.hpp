#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "monodiff/error.hpp"
#include "monodiff/expression.hpp"
#include "monodiff/grid.hpp"

namespace monodiff {

/// Entries of the symmetric diffusion tensor [[a, b], [b, c]] at a point.
struct Tensor {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    [[nodiscard]] double det() const noexcept { return a * c - b * b; }
};

/// Diffusion tensor D(x, y) = [[a, b], [b, c]] given by closed-form
/// expressions, so it can be evaluated anywhere in the closed unit square
/// (arm midpoints, clipped boundary points) and differentiated.
class DiffusionField {
public:
    DiffusionField(std::string name, Expr a, Expr b, Expr c)
        : name_(std::move(name)),
          a_(std::move(a)),
          b_(std::move(b)),
          c_(std::move(c)),
          ca_(a_),
          cb_(b_),
          cc_(c_) {}

    static DiffusionField from_strings(std::string name, std::string_view a, std::string_view b,
                                       std::string_view c) {
        return {std::move(name), Expr::parse(a), Expr::parse(b), Expr::parse(c)};
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const Expr& a() const noexcept { return a_; }
    [[nodiscard]] const Expr& b() const noexcept { return b_; }
    [[nodiscard]] const Expr& c() const noexcept { return c_; }

    [[nodiscard]] bool is_constant() const { return a_.is_closed() && b_.is_closed() && c_.is_closed(); }

    /// Throws DomainError outside the closed unit square (1e-12 slack for
    /// boundary points produced by arithmetic).
    [[nodiscard]] Tensor eval(double x, double y) const {
        constexpr double slack = 1e-12;
        if (!(x >= -slack && x <= 1.0 + slack && y >= -slack && y <= 1.0 + slack)) {
            std::ostringstream msg;
            msg << "point (" << x << ", " << y << ") lies outside the closed unit square";
            throw DomainError(msg.str());
        }
        return eval_unchecked(x, y);
    }

    [[nodiscard]] Tensor eval(Point p) const { return eval(p.x, p.y); }

    [[nodiscard]] Tensor eval_unchecked(double x, double y) const noexcept {
        return {ca_(x, y), cb_(x, y), cc_(x, y)};
    }

private:
    std::string name_;
    Expr a_, b_, c_;
    CompiledExpr ca_, cb_, cc_;
};

inline DiffusionField constant_field(double a, double b, double c, std::string name = "constant") {
    return {std::move(name), Expr::constant(a), Expr::constant(b), Expr::constant(c)};
}

inline DiffusionField identity_field() { return constant_field(1.0, 0.0, 1.0, "identity"); }

/// [[9, 4 sin(2 pi x y)], [4 sin(2 pi x y), 3]]
inline DiffusionField exam1_field() {
    const Expr s = sin(Expr::constant(2.0 * std::numbers::pi) * Expr::x() * Expr::y());
    return {"exam1", Expr::constant(9.0), Expr::constant(4.0) * s, Expr::constant(3.0)};
}

/// [[1.1, sin(2 pi x y)], [sin(2 pi x y), 1.1]], strictly diagonally dominant.
inline DiffusionField exam3_field() {
    const Expr s = sin(Expr::constant(2.0 * std::numbers::pi) * Expr::x() * Expr::y());
    return {"exam3", Expr::constant(1.1), s, Expr::constant(1.1)};
}

/// Rotation of diag(k, 1) by theta = pi sin(x) cos(y).
inline DiffusionField exam4_field(double k) {
    if (!(k > 0.0)) throw FieldRejected("exam4 needs k > 0");
    const Expr theta = Expr::constant(std::numbers::pi) * sin(Expr::x()) * cos(Expr::y());
    const Expr co = cos(theta);
    const Expr si = sin(theta);
    const Expr kk = Expr::constant(k);
    return {"exam4", kk * co * co + si * si, Expr::constant(k - 1.0) * co * si, kk * si * si + co * co};
}

/// Registry lookup for "identity", "exam1", "exam3" and "exam4" (uses k).
inline DiffusionField builtin_field(std::string_view name, double k = 10.0) {
    if (name == "identity") return identity_field();
    if (name == "exam1") return exam1_field();
    if (name == "exam3") return exam3_field();
    if (name == "exam4") return exam4_field(k);
    throw FieldRejected("unknown built-in field '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Eigen-decomposition

/// lambda1 >= lambda2 with principal axis at angle psi from the x-axis:
///     D = lambda1 v v^T + lambda2 w w^T,  v = (cos psi, sin psi), w = (-sin psi, cos psi).
struct EigenPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double psi = 0.0;

    [[nodiscard]] Tensor reconstruct() const noexcept {
        const double cs = std::cos(psi);
        const double sn = std::sin(psi);
        return {lambda1 * cs * cs + lambda2 * sn * sn, (lambda1 - lambda2) * cs * sn,
                lambda1 * sn * sn + lambda2 * cs * cs};
    }
};

inline EigenPair eigen(const Tensor& t) noexcept {
    const double mean = 0.5 * (t.a + t.c);
    const double half_gap = std::hypot(0.5 * (t.a - t.c), t.b);
    EigenPair e;
    e.lambda1 = mean + half_gap;
    // Product form avoids cancellation in the smaller eigenvalue.
    e.lambda2 = e.lambda1 != 0.0 ? t.det() / e.lambda1 : mean - half_gap;
    e.psi = 0.5 * std::atan2(2.0 * t.b, t.a - t.c);
    return e;
}

inline EigenPair eigen(const DiffusionField& field, double x, double y) { return eigen(field.eval(x, y)); }

// ---------------------------------------------------------------------------
// Probe lattice

/// Tensor samples on the lattice (i/n, j/n), i, j = 0..n, with
/// n = ceil(1 / probe_step). Halving probe_step yields a superset lattice
/// whenever 1 / probe_step is an integer.
class ProbeLattice {
public:
    ProbeLattice(const DiffusionField& field, double probe_step) {
        if (!(probe_step > 0.0) || probe_step > 1.0) {
            throw FieldRejected("probe step must lie in (0, 1]");
        }
        n_ = std::max(1, static_cast<int>(std::ceil(1.0 / probe_step - 1e-9)));
        values_.resize(static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 1));
        for (int k = 0; k <= n_; ++k) {
            const double y = coord(k);
            for (int j = 0; j <= n_; ++j) values_[index(j, k)] = field.eval_unchecked(coord(j), y);
        }
    }

    [[nodiscard]] int intervals() const noexcept { return n_; }
    [[nodiscard]] double step() const noexcept { return 1.0 / static_cast<double>(n_); }
    [[nodiscard]] double coord(int i) const noexcept { return static_cast<double>(i) / static_cast<double>(n_); }
    [[nodiscard]] const Tensor& at(int j, int k) const noexcept { return values_[index(j, k)]; }
    [[nodiscard]] const std::vector<Tensor>& values() const noexcept { return values_; }

private:
    [[nodiscard]] std::size_t index(int j, int k) const noexcept {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(j);
    }

    int n_ = 0;
    std::vector<Tensor> values_;
};

// ---------------------------------------------------------------------------
// Positive-definiteness check

struct SpdReport {
    bool passed = false;
    double min_a = std::numeric_limits<double>::infinity();
    double min_c = std::numeric_limits<double>::infinity();
    double min_det = std::numeric_limits<double>::infinity();
    Point argmin_det;
    std::optional<Point> offending;  ///< first probe with a <= 0, c <= 0 or det <= 0
};

inline SpdReport validate_spd(const ProbeLattice& lattice) {
    SpdReport r;
    const int n = lattice.intervals();
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j) {
            const Tensor& t = lattice.at(j, k);
            const Point p{lattice.coord(j), lattice.coord(k)};
            r.min_a = std::min(r.min_a, t.a);
            r.min_c = std::min(r.min_c, t.c);
            const double d = t.det();
            if (d < r.min_det) {
                r.min_det = d;
                r.argmin_det = p;
            }
            const bool bad = !(t.a > 0.0) || !(t.c > 0.0) || !(d > 0.0);
            if (bad && !r.offending) r.offending = p;
        }
    }
    r.passed = !r.offending.has_value();
    return r;
}

inline SpdReport validate_spd(const DiffusionField& field, double probe_step) {
    return validate_spd(ProbeLattice(field, probe_step));
}

// ---------------------------------------------------------------------------
// Ratio functions and the global splitting constants

/// F = c/b (absent where b == 0), G = b/a and the cut-offs
///     F+ = F where b > 0 and F < M, else M
///     F- = F where b < 0 and F > -M, else -M.
struct RatioValues {
    std::optional<double> f;
    double g = 0.0;
    double f_plus = 0.0;
    double f_minus = 0.0;
};

inline RatioValues ratio_functions(const Tensor& t, double cap_m) noexcept {
    RatioValues r;
    r.g = t.b / t.a;
    r.f_plus = cap_m;
    r.f_minus = -cap_m;
    if (t.b != 0.0) {
        const double f = t.c / t.b;
        r.f = f;
        if (t.b > 0.0 && f < cap_m) r.f_plus = f;
        if (t.b < 0.0 && f > -cap_m) r.f_minus = f;
    }
    return r;
}

inline RatioValues ratio_functions(const DiffusionField& field, double x, double y, double cap_m) {
    return ratio_functions(field.eval(x, y), cap_m);
}

/// Global constants of the splitting theory, estimated on the probe lattice.
///
/// alpha_bar and alpha are the sampled inf of det(D) and sup of
/// max(a, c) * (|b| + 1). The radius uses the safety-adjusted pair
/// (1 - safety) * alpha_bar and (1 + safety) * alpha:
///     radius = (1 - s) alpha_bar / (3 (1 + s) alpha max(L_F+, L_F-, L_G)),
/// capped at the domain diameter sqrt(2). Lipschitz constants are first
/// difference estimates over neighbouring probe pairs, not certificates.
struct SplittingConstants {
    double alpha_bar = 0.0;
    double alpha = 0.0;
    double cap_m = 0.0;
    double lip_fplus = 0.0;
    double lip_fminus = 0.0;
    double lip_g = 0.0;
    double radius = 0.0;
    double safety = 0.0;
    double probe_step = 0.0;

    [[nodiscard]] double max_lipschitz() const noexcept { return std::max({lip_fplus, lip_fminus, lip_g}); }
    [[nodiscard]] double safe_alpha_bar() const noexcept { return (1.0 - safety) * alpha_bar; }
    [[nodiscard]] double safe_alpha() const noexcept { return (1.0 + safety) * alpha; }
};

inline constexpr double kDefaultProbeStep = 1e-3;
inline constexpr double kDefaultSafety = 0.05;

inline SplittingConstants compute_constants(const ProbeLattice& lattice, double safety = kDefaultSafety) {
    if (!(safety >= 0.0 && safety < 1.0)) throw FieldRejected("safety margin must lie in [0, 1)");
    const SpdReport spd = validate_spd(lattice);
    if (!spd.passed) {
        std::ostringstream msg;
        msg << "diffusion tensor is not positive definite at (" << spd.offending->x << ", " << spd.offending->y
            << ")";
        throw FieldRejected(msg.str());
    }

    SplittingConstants k;
    k.safety = safety;
    k.probe_step = lattice.step();
    k.alpha_bar = spd.min_det;
    double sup_g = 0.0;
    for (const Tensor& t : lattice.values()) {
        const double weight = std::fabs(t.b) + 1.0;
        k.alpha = std::max({k.alpha, t.a * weight, t.c * weight});
        sup_g = std::max(sup_g, std::fabs(t.b / t.a));
    }
    k.cap_m = sup_g + k.alpha_bar / k.alpha;

    const int n = lattice.intervals();
    const auto stride = static_cast<std::size_t>(n + 1);
    std::vector<double> g(lattice.values().size());
    std::vector<double> fp(g.size());
    std::vector<double> fm(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const RatioValues r = ratio_functions(lattice.values()[i], k.cap_m);
        g[i] = r.g;
        fp[i] = r.f_plus;
        fm[i] = r.f_minus;
    }
    const double h = lattice.step();
    const double hd = std::sqrt(2.0) * h;
    const auto lipschitz = [&](const std::vector<double>& f) {
        double best = 0.0;
        for (int row = 0; row <= n; ++row) {
            for (int col = 0; col <= n; ++col) {
                const std::size_t i = static_cast<std::size_t>(row) * stride + static_cast<std::size_t>(col);
                if (col < n) best = std::max(best, std::fabs(f[i + 1] - f[i]) / h);
                if (row < n) {
                    best = std::max(best, std::fabs(f[i + stride] - f[i]) / h);
                    if (col < n) best = std::max(best, std::fabs(f[i + stride + 1] - f[i]) / hd);
                    if (col > 0) best = std::max(best, std::fabs(f[i + stride - 1] - f[i]) / hd);
                }
            }
        }
        return best;
    };
    k.lip_g = lipschitz(g);
    k.lip_fplus = lipschitz(fp);
    k.lip_fminus = lipschitz(fm);

    const double lip = k.max_lipschitz();
    const double diameter = std::sqrt(2.0);
    k.radius = lip > 0.0 ? std::min(diameter, k.safe_alpha_bar() / (3.0 * k.safe_alpha() * lip)) : diameter;
    return k;
}

inline SplittingConstants compute_constants(const DiffusionField& field, double probe_step = kDefaultProbeStep,
                                            double safety = kDefaultSafety) {
    return compute_constants(ProbeLattice(field, probe_step), safety);
}

}  // namespace monodiff
