#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "monodiff/error.hpp"

namespace monodiff {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& p, const Point& q) { return p.x == q.x && p.y == q.y; }

inline double distance(const Point& p, const Point& q) { return std::hypot(p.x - q.x, p.y - q.y); }

/// Lattice coordinates of a mesh node; j is the column (x), k the row (y).
struct NodeIndex {
    int j = 0;
    int k = 0;
};

inline bool operator==(const NodeIndex& p, const NodeIndex& q) { return p.j == q.j && p.k == q.k; }

/// Uniform mesh of the unit square with N intervals per side, nodes
/// (j/N, k/N) for j, k = 0..N.
///
/// Interior nodes (1 <= j, k <= N-1) are numbered row-major:
///     linear = (k - 1) * (N - 1) + (j - 1).
/// Matrix rows, exported triplets and solution vectors all use this order.
class Grid {
public:
    explicit Grid(int n_intervals) : n_(n_intervals) {
        if (n_intervals < 2) {
            throw InvalidGrid("grid needs N >= 2 intervals for an interior node, got " +
                              std::to_string(n_intervals));
        }
        h_ = 1.0 / static_cast<double>(n_);
    }

    [[nodiscard]] int intervals() const noexcept { return n_; }
    [[nodiscard]] double spacing() const noexcept { return h_; }

    /// Division instead of j * h keeps coordinates like 2/4 exact.
    [[nodiscard]] double coord(int index) const noexcept {
        return static_cast<double>(index) / static_cast<double>(n_);
    }
    [[nodiscard]] Point point(NodeIndex node) const noexcept { return {coord(node.j), coord(node.k)}; }

    [[nodiscard]] int interior_per_side() const noexcept { return n_ - 1; }
    [[nodiscard]] int interior_count() const noexcept { return (n_ - 1) * (n_ - 1); }

    [[nodiscard]] bool contains(NodeIndex node) const noexcept {
        return node.j >= 0 && node.j <= n_ && node.k >= 0 && node.k <= n_;
    }
    [[nodiscard]] bool is_interior(NodeIndex node) const noexcept {
        return node.j >= 1 && node.j <= n_ - 1 && node.k >= 1 && node.k <= n_ - 1;
    }
    [[nodiscard]] bool is_boundary(NodeIndex node) const noexcept {
        return contains(node) && !is_interior(node);
    }

    [[nodiscard]] std::optional<int> linear(NodeIndex node) const noexcept {
        if (!is_interior(node)) return std::nullopt;
        return (node.k - 1) * (n_ - 1) + (node.j - 1);
    }

    [[nodiscard]] NodeIndex node(int linear_index) const {
        if (linear_index < 0 || linear_index >= interior_count()) {
            throw InvalidGrid("interior index " + std::to_string(linear_index) + " out of range");
        }
        return {linear_index % (n_ - 1) + 1, linear_index / (n_ - 1) + 1};
    }

    /// Boundary nodes in counter-clockwise order starting at the origin.
    [[nodiscard]] std::vector<NodeIndex> boundary_nodes() const {
        std::vector<NodeIndex> out;
        out.reserve(static_cast<std::size_t>(4 * n_));
        for (int j = 0; j < n_; ++j) out.push_back({j, 0});
        for (int k = 0; k < n_; ++k) out.push_back({n_, k});
        for (int j = n_; j > 0; --j) out.push_back({j, n_});
        for (int k = n_; k > 0; --k) out.push_back({0, k});
        return out;
    }

private:
    int n_;
    double h_;
};

inline Grid build_grid(int n_intervals) { return Grid(n_intervals); }

/// Grid nodes (boundary included) strictly inside the open Euclidean ball.
inline std::vector<Point> ball_nodes(const Grid& grid, NodeIndex center, double radius) {
    std::vector<Point> out;
    if (!(radius > 0.0)) return out;
    const Point c = grid.point(center);
    const int n = grid.intervals();
    const int reach = static_cast<int>(std::ceil(radius / grid.spacing()));
    for (int k = std::max(0, center.k - reach); k <= std::min(n, center.k + reach); ++k) {
        for (int j = std::max(0, center.j - reach); j <= std::min(n, center.j + reach); ++j) {
            const Point p = grid.point({j, k});
            if (distance(p, c) < radius) out.push_back(p);
        }
    }
    return out;
}

}  // namespace monodiff
