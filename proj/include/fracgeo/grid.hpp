#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "shape.hpp"

namespace fracgeo {

inline constexpr std::size_t kDefaultMaxCells = std::size_t{1} << 22;

/// Cell-count guard for grid construction; FRACGEO_MAX_CELLS overrides it.
inline std::size_t max_cells_from_env() {
    if (const char* env = std::getenv("FRACGEO_MAX_CELLS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultMaxCells;
}

/// Uniform grid of square cells covering an open set G.
///
/// Cells are addressed by a linear index `ix + nx * iy`. Cells whose
/// centre lies in G are G-cells and additionally carry a dense G-index
/// (0 .. g_count()-1) used by fields and kernels.
class GridDomain {
public:
    GridDomain(int dim, double spacing, Point origin, std::array<int, 2> shape, std::vector<std::uint8_t> g_mask)
        : dim_(dim), h_(spacing), origin_(origin), shape_(shape), g_mask_(std::move(g_mask)) {
        require(dim == 1 || dim == 2, "grid dimension must be 1 or 2");
        require(spacing > 0 && std::isfinite(spacing), "grid spacing must be positive");
        require(shape[0] >= 1 && shape[1] >= 1, "grid needs at least one cell per axis");
        require(dim == 2 || shape[1] == 1, "1D grid must have a single row");
        require(g_mask_.size() == cell_count(), "g_mask size does not match the grid shape");
        if (dim_ == 1) origin_[1] = 0.0;

        g_index_.assign(cell_count(), -1);
        for (std::size_t c = 0; c < cell_count(); ++c) {
            g_mask_[c] = g_mask_[c] ? 1 : 0;
            if (g_mask_[c]) {
                g_index_[c] = static_cast<std::int32_t>(g_cells_.size());
                g_cells_.push_back(static_cast<std::int32_t>(c));
            }
        }
        boundary_layer_.assign(cell_count(), 0);
        for (std::int32_t c : g_cells_) {
            const int ix = c % shape_[0], iy = c / shape_[0];
            bool touches = false;
            for (int dy = (dim_ == 2 ? -1 : 0); dy <= (dim_ == 2 ? 1 : 0) && !touches; ++dy)
                for (int dx = -1; dx <= 1 && !touches; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    touches = !is_g(ix + dx, iy + dy);
                }
            boundary_layer_[c] = touches ? 1 : 0;
        }
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] double spacing() const noexcept { return h_; }
    [[nodiscard]] const Point& origin() const noexcept { return origin_; }
    [[nodiscard]] const std::array<int, 2>& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(shape_[0]) * static_cast<std::size_t>(shape_[1]);
    }
    [[nodiscard]] double cell_volume() const noexcept { return dim_ == 2 ? h_ * h_ : h_; }

    [[nodiscard]] std::span<const std::uint8_t> g_mask() const noexcept { return g_mask_; }
    [[nodiscard]] std::span<const std::uint8_t> boundary_layer() const noexcept { return boundary_layer_; }
    /// Linear cell indices of the G-cells, ascending.
    [[nodiscard]] std::span<const std::int32_t> g_cells() const noexcept { return g_cells_; }
    [[nodiscard]] std::size_t g_count() const noexcept { return g_cells_.size(); }
    /// G-index of a linear cell, or -1 outside G.
    [[nodiscard]] std::int32_t g_index(std::size_t cell) const { return g_index_[cell]; }

    [[nodiscard]] std::array<int, 2> coords(std::size_t cell) const noexcept {
        return {static_cast<int>(cell % shape_[0]), static_cast<int>(cell / shape_[0])};
    }
    [[nodiscard]] bool in_grid(int ix, int iy) const noexcept {
        return ix >= 0 && iy >= 0 && ix < shape_[0] && iy < shape_[1];
    }
    [[nodiscard]] std::size_t linear(int ix, int iy) const noexcept {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(shape_[0]) * static_cast<std::size_t>(iy);
    }
    [[nodiscard]] bool is_g(int ix, int iy) const noexcept { return in_grid(ix, iy) && g_mask_[linear(ix, iy)]; }
    [[nodiscard]] Point center(std::size_t cell) const noexcept {
        const auto [ix, iy] = coords(cell);
        return {origin_[0] + (ix + 0.5) * h_, dim_ == 2 ? origin_[1] + (iy + 0.5) * h_ : 0.0};
    }

private:
    int dim_;
    double h_;
    Point origin_;
    std::array<int, 2> shape_;
    std::vector<std::uint8_t> g_mask_;
    std::vector<std::uint8_t> boundary_layer_;
    std::vector<std::int32_t> g_cells_;
    std::vector<std::int32_t> g_index_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Subset of the G-cells of a domain.
class CellSet {
public:
    explicit CellSet(DomainPtr domain) : domain_(std::move(domain)), mask_(domain_->cell_count(), 0) {}

    CellSet(DomainPtr domain, std::vector<std::uint8_t> mask) : domain_(std::move(domain)), mask_(std::move(mask)) {
        require(mask_.size() == domain_->cell_count(), "cell-set mask size does not match the domain");
        const auto g = domain_->g_mask();
        for (std::size_t c = 0; c < mask_.size(); ++c) {
            mask_[c] = mask_[c] ? 1 : 0;
            require(!mask_[c] || g[c], "cell set must be a subset of the G-cells");
        }
    }

    [[nodiscard]] const DomainPtr& domain() const noexcept { return domain_; }
    [[nodiscard]] std::span<const std::uint8_t> mask() const noexcept { return mask_; }
    [[nodiscard]] bool contains(std::size_t cell) const { return mask_[cell] != 0; }

    void insert(std::size_t cell) {
        require(domain_->g_mask()[cell], "cell set must be a subset of the G-cells");
        mask_[cell] = 1;
    }
    void erase(std::size_t cell) { mask_[cell] = 0; }

    [[nodiscard]] std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
    }
    [[nodiscard]] bool empty() const noexcept { return count() == 0; }
    [[nodiscard]] double volume() const noexcept { return static_cast<double>(count()) * domain_->cell_volume(); }

    /// G-cells not in this set.
    [[nodiscard]] CellSet complement() const {
        CellSet out(domain_);
        const auto g = domain_->g_mask();
        for (std::size_t c = 0; c < mask_.size(); ++c) out.mask_[c] = (g[c] && !mask_[c]) ? 1 : 0;
        return out;
    }
    [[nodiscard]] CellSet united(const CellSet& o) const {
        check_same(o);
        CellSet out(*this);
        for (std::size_t c = 0; c < mask_.size(); ++c) out.mask_[c] |= o.mask_[c];
        return out;
    }
    [[nodiscard]] CellSet intersected(const CellSet& o) const {
        check_same(o);
        CellSet out(*this);
        for (std::size_t c = 0; c < mask_.size(); ++c) out.mask_[c] &= o.mask_[c];
        return out;
    }
    [[nodiscard]] bool subset_of(const CellSet& o) const {
        check_same(o);
        for (std::size_t c = 0; c < mask_.size(); ++c)
            if (mask_[c] && !o.mask_[c]) return false;
        return true;
    }
    [[nodiscard]] bool intersects(const CellSet& o) const {
        check_same(o);
        for (std::size_t c = 0; c < mask_.size(); ++c)
            if (mask_[c] && o.mask_[c]) return true;
        return false;
    }

    friend bool operator==(const CellSet& a, const CellSet& b) {
        return a.domain_ == b.domain_ && a.mask_ == b.mask_;
    }

private:
    void check_same(const CellSet& o) const {
        if (o.domain_ != domain_) throw DomainMismatch();
    }

    DomainPtr domain_;
    std::vector<std::uint8_t> mask_;
};

/// The domain's boundary layer as a cell set.
inline CellSet boundary_layer_set(const DomainPtr& d) {
    return CellSet(d, std::vector<std::uint8_t>(d->boundary_layer().begin(), d->boundary_layer().end()));
}

/// All G-cells of the domain.
inline CellSet all_g_cells(const DomainPtr& d) {
    return CellSet(d, std::vector<std::uint8_t>(d->g_mask().begin(), d->g_mask().end()));
}

namespace detail {

/// Membership of every cell centre in the shape; rows of Koch polygons are
/// filled by scanline crossings.
inline std::vector<std::uint8_t> centers_inside(const Shape& shape, int dim, double h, Point origin,
                                                std::array<int, 2> n) {
    std::vector<std::uint8_t> in(static_cast<std::size_t>(n[0]) * n[1], 0);
    for (int iy = 0; iy < n[1]; ++iy) {
        const double y = dim == 2 ? origin[1] + (iy + 0.5) * h : 0.0;
        std::vector<double> crossings;
        if (shape.is_koch()) crossings = polygon_row_crossings(shape.polygon(), y);
        for (int ix = 0; ix < n[0]; ++ix) {
            const Point p{origin[0] + (ix + 0.5) * h, y};
            const bool inside = shape.is_koch() ? inside_by_crossings(crossings, p[0]) : shape.contains(p);
            in[static_cast<std::size_t>(ix) + static_cast<std::size_t>(n[0]) * iy] = inside ? 1 : 0;
        }
    }
    return in;
}

} // namespace detail

/// Grid covering the shape's bounding box inflated by `margin`, centred on
/// the box, with G-cells where the cell centre lies inside the shape.
inline DomainPtr build_domain(const Shape& shape, double spacing, double margin,
                              std::size_t max_cells = max_cells_from_env()) {
    require(spacing > 0 && std::isfinite(spacing), "spacing must be positive");
    require(margin >= 0 && std::isfinite(margin), "margin must be non-negative");
    const int dim = shape.dim();
    const auto [lo, hi] = shape.bounds();
    std::array<int, 2> n{1, 1};
    Point origin{0.0, 0.0};
    double total = 1.0;
    for (int k = 0; k < dim; ++k) {
        const double extent = (hi[k] - lo[k]) + 2 * margin;
        const double cells = std::ceil(extent / spacing - 1e-9);
        total *= std::max(cells, 1.0);
        require(std::isfinite(cells), "shape must be bounded");
        if (total > static_cast<double>(max_cells))
            throw CapacityExceeded("grid would exceed the cell-count cap of " + std::to_string(max_cells));
        n[k] = std::max(1, static_cast<int>(cells));
        origin[k] = (lo[k] + hi[k]) / 2 - n[k] * spacing / 2;
    }
    auto mask = detail::centers_inside(shape, dim, spacing, origin, n);
    return std::make_shared<const GridDomain>(dim, spacing, origin, n, std::move(mask));
}

/// Domain from an explicit G mask (tests and hand-built configurations).
inline DomainPtr make_domain(int dim, double spacing, Point origin, std::array<int, 2> shape,
                             std::vector<std::uint8_t> g_mask) {
    return std::make_shared<const GridDomain>(dim, spacing, origin, shape, std::move(g_mask));
}

/// G-cells whose centre lies inside the shape.
inline CellSet rasterize(const Shape& shape, const DomainPtr& domain) {
    require(shape.dim() == domain->dim(), "shape and domain dimensions differ");
    auto in = detail::centers_inside(shape, domain->dim(), domain->spacing(), domain->origin(), domain->shape());
    const auto g = domain->g_mask();
    for (std::size_t c = 0; c < in.size(); ++c) in[c] = (in[c] && g[c]) ? 1 : 0;
    return CellSet(domain, std::move(in));
}

/// |A + B(0,r)| on the (unbounded) lattice: h^n times the number of lattice
/// cells whose centre is within distance r of some A-cell centre.
inline double dilate_volume(const CellSet& a, double r) {
    require(r >= 0 && std::isfinite(r), "dilation radius must be non-negative");
    const auto& d = *a.domain();
    const int dim = d.dim();
    const double h = d.spacing();
    const int reach = static_cast<int>(std::floor(r / h + 1e-9));
    const double r2 = (r / h) * (r / h) * (1 + 1e-12);

    int lo_x = d.shape()[0], lo_y = d.shape()[1], hi_x = -1, hi_y = -1;
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        if (!a.contains(c)) continue;
        const auto [ix, iy] = d.coords(c);
        lo_x = std::min(lo_x, ix), hi_x = std::max(hi_x, ix);
        lo_y = std::min(lo_y, iy), hi_y = std::max(hi_y, iy);
    }
    if (hi_x < 0) return 0.0;

    const int ry = dim == 2 ? reach : 0;
    const int wx = hi_x - lo_x + 1 + 2 * reach;
    const int wy = hi_y - lo_y + 1 + 2 * ry;
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(wx) * wy, 0);

    std::vector<std::array<int, 2>> stencil;
    for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -reach; dx <= reach; ++dx)
            if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy <= r2) stencil.push_back({dx, dy});

    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        if (!a.contains(c)) continue;
        const auto [ix, iy] = d.coords(c);
        const int bx = ix - lo_x + reach, by = iy - lo_y + ry;
        for (const auto& [dx, dy] : stencil)
            hit[static_cast<std::size_t>(bx + dx) + static_cast<std::size_t>(wx) * (by + dy)] = 1;
    }
    const auto count = std::count(hit.begin(), hit.end(), std::uint8_t{1});
    return static_cast<double>(count) * d.cell_volume();
}

/// Lower s-dimensional Minkowski content, unnormalized:
/// min over the schedule of |A + B(0,r)| / r^(n-s). Every r must be at
/// least two cells wide.
inline double minkowski_content(const CellSet& a, double s, std::span<const double> r_schedule) {
    const auto& d = *a.domain();
    require(s >= 0 && s <= d.dim(), "Minkowski dimension s must lie in [0, n]");
    require(!r_schedule.empty(), "radius schedule is empty");
    for (double r : r_schedule)
        require(r >= 2 * d.spacing(), "radius " + std::to_string(r) + " is below two grid cells");
    if (a.empty()) return 0.0;
    double best = INFINITY;
    for (double r : r_schedule) best = std::min(best, dilate_volume(a, r) / std::pow(r, d.dim() - s));
    return best;
}

} // namespace fracgeo
