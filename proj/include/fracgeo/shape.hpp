#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"

namespace fracgeo {

/// Point in R^1 or R^2. In 1D the second coordinate is ignored and kept 0.
using Point = std::array<double, 2>;

struct Ball {
    Point center{};
    double radius = 1.0;
};

struct Box {
    Point lo{};
    Point hi{};
};

struct Annulus {
    Point center{};
    double r_in = 0.5;
    double r_out = 1.0;
};

/// Closed region bounded by the level-k Koch snowflake. Level 0 is the
/// equilateral triangle with circumradius `scale` centred at `anchor`.
struct KochPrefractal {
    int level = 0;
    Point anchor{};
    double scale = 1.0;
};

inline constexpr int kMaxKochLevel = 6;

/// Counter-clockwise vertex list of the Koch snowflake polygon.
inline std::vector<Point> koch_polygon(const KochPrefractal& k) {
    std::vector<Point> poly;
    for (int v = 0; v < 3; ++v) {
        const double a = std::numbers::pi / 2 + v * 2 * std::numbers::pi / 3;
        poly.push_back({k.anchor[0] + k.scale * std::cos(a), k.anchor[1] + k.scale * std::sin(a)});
    }
    const double c = std::cos(-std::numbers::pi / 3), s = std::sin(-std::numbers::pi / 3);
    for (int lvl = 0; lvl < k.level; ++lvl) {
        std::vector<Point> next;
        next.reserve(poly.size() * 4);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point& a = poly[i];
            const Point& b = poly[(i + 1) % poly.size()];
            const double dx = (b[0] - a[0]) / 3, dy = (b[1] - a[1]) / 3;
            const Point p1{a[0] + dx, a[1] + dy};
            const Point p3{a[0] + 2 * dx, a[1] + 2 * dy};
            // outward side of a CCW edge is to the right
            const Point peak{p1[0] + c * dx - s * dy, p1[1] + s * dx + c * dy};
            next.push_back(a);
            next.push_back(p1);
            next.push_back(peak);
            next.push_back(p3);
        }
        poly = std::move(next);
    }
    return poly;
}

/// x-coordinates where the horizontal line through `y` crosses the polygon,
/// using the half-open rule (y0 > y) != (y1 > y). Sorted.
inline std::vector<double> polygon_row_crossings(const std::vector<Point>& poly, double y) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        if ((p[1] > y) != (q[1] > y)) xs.push_back(p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

/// Even-odd membership of x given the sorted crossings of its row.
inline bool inside_by_crossings(const std::vector<double>& sorted_xs, double x) {
    const auto above = sorted_xs.end() - std::upper_bound(sorted_xs.begin(), sorted_xs.end(), x);
    return (above % 2) == 1;
}

/// Bounded test geometry in one or two dimensions.
class Shape {
public:
    using Variant = std::variant<Ball, Box, Annulus, KochPrefractal>;

    Shape(Variant v, int dim) : geom_(std::move(v)), dim_(dim) {
        require(dim == 1 || dim == 2, "shape dimension must be 1 or 2");
        std::visit([this](const auto& g) { validate(g); }, geom_);
        if (auto* k = std::get_if<KochPrefractal>(&geom_))
            polygon_ = std::make_shared<const std::vector<Point>>(koch_polygon(*k));
    }

    static Shape ball(Point c, double r, int dim = 2) { return Shape(Ball{c, r}, dim); }
    static Shape box(Point lo, Point hi, int dim = 2) { return Shape(Box{lo, hi}, dim); }
    static Shape annulus(Point c, double r_in, double r_out, int dim = 2) {
        return Shape(Annulus{c, r_in, r_out}, dim);
    }
    static Shape koch(int level, Point anchor, double scale) {
        return Shape(KochPrefractal{level, anchor, scale}, 2);
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] const Variant& geometry() const noexcept { return geom_; }
    [[nodiscard]] bool is_koch() const noexcept { return polygon_ != nullptr; }
    [[nodiscard]] const std::vector<Point>& polygon() const { return *polygon_; }

    /// Membership of the open region (closed region for the Koch polygon,
    /// up to the half-open crossing rule).
    [[nodiscard]] bool contains(const Point& p) const {
        return std::visit([&](const auto& g) { return contains_impl(g, p); }, geom_);
    }

    /// Axis-aligned bounding box {lo, hi}.
    [[nodiscard]] std::array<Point, 2> bounds() const {
        return std::visit([&](const auto& g) { return bounds_impl(g); }, geom_);
    }

    /// Same shape with every length multiplied by `lambda`.
    [[nodiscard]] Shape scaled(double lambda) const {
        require(lambda > 0, "scale factor must be positive");
        auto sc = [&](Point p) { return Point{p[0] * lambda, p[1] * lambda}; };
        return std::visit(
            [&](const auto& g) -> Shape {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Ball>)
                    return Shape(Ball{sc(g.center), g.radius * lambda}, dim_);
                else if constexpr (std::is_same_v<T, Box>)
                    return Shape(Box{sc(g.lo), sc(g.hi)}, dim_);
                else if constexpr (std::is_same_v<T, Annulus>)
                    return Shape(Annulus{sc(g.center), g.r_in * lambda, g.r_out * lambda}, dim_);
                else
                    return Shape(KochPrefractal{g.level, sc(g.anchor), g.scale * lambda}, dim_);
            },
            geom_);
    }

    [[nodiscard]] std::string kind() const {
        return std::visit(
            [](const auto& g) -> std::string {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Ball>) return "ball";
                else if constexpr (std::is_same_v<T, Box>) return "box";
                else if constexpr (std::is_same_v<T, Annulus>) return "annulus";
                else return "koch";
            },
            geom_);
    }

private:
    double dist2(const Point& a, const Point& b) const {
        const double dx = a[0] - b[0];
        const double dy = dim_ == 2 ? a[1] - b[1] : 0.0;
        return dx * dx + dy * dy;
    }

    void validate(const Ball& b) const { require(b.radius > 0, "ball radius must be positive"); }
    void validate(const Box& b) const {
        for (int k = 0; k < dim_; ++k) require(b.lo[k] < b.hi[k], "box requires lo < hi componentwise");
    }
    void validate(const Annulus& a) const {
        require(0 < a.r_in && a.r_in < a.r_out, "annulus requires 0 < r_in < r_out");
    }
    void validate(const KochPrefractal& k) const {
        require(dim_ == 2, "Koch prefractal is two-dimensional");
        require(k.level >= 0 && k.level <= kMaxKochLevel, "Koch level must lie in [0, 6]");
        require(k.scale > 0, "Koch scale must be positive");
    }

    bool contains_impl(const Ball& b, const Point& p) const { return dist2(p, b.center) < b.radius * b.radius; }
    bool contains_impl(const Box& b, const Point& p) const {
        for (int k = 0; k < dim_; ++k)
            if (!(b.lo[k] < p[k] && p[k] < b.hi[k])) return false;
        return true;
    }
    bool contains_impl(const Annulus& a, const Point& p) const {
        const double d2 = dist2(p, a.center);
        return a.r_in * a.r_in < d2 && d2 < a.r_out * a.r_out;
    }
    bool contains_impl(const KochPrefractal&, const Point& p) const {
        return inside_by_crossings(polygon_row_crossings(*polygon_, p[1]), p[0]);
    }

    std::array<Point, 2> round_bounds(const Point& c, double r) const {
        Point lo{c[0] - r, dim_ == 2 ? c[1] - r : 0.0};
        Point hi{c[0] + r, dim_ == 2 ? c[1] + r : 0.0};
        return {lo, hi};
    }
    std::array<Point, 2> bounds_impl(const Ball& b) const { return round_bounds(b.center, b.radius); }
    std::array<Point, 2> bounds_impl(const Box& b) const {
        Point lo = b.lo, hi = b.hi;
        if (dim_ == 1) lo[1] = hi[1] = 0.0;
        return {lo, hi};
    }
    std::array<Point, 2> bounds_impl(const Annulus& a) const { return round_bounds(a.center, a.r_out); }
    std::array<Point, 2> bounds_impl(const KochPrefractal&) const {
        Point lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
        for (const auto& v : *polygon_)
            for (int k = 0; k < 2; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        return {lo, hi};
    }

    Variant geom_;
    int dim_;
    std::shared_ptr<const std::vector<Point>> polygon_;
};

} // namespace fracgeo
