#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "summation.hpp"

namespace fracgeo {

struct KernelParams {
    double delta = 0.5;
    /// Pairs closer than this many cells get the subdivided quadrature.
    int near_field_radius_cells = 4;
    int subdivision_depth = 3;
    /// Pairs farther apart than this (plus half a cell diagonal) are dropped.
    double truncation_radius = std::numeric_limits<double>::infinity();
};

inline void validate(const KernelParams& p, double spacing) {
    require(p.delta > 0 && p.delta < 1, "delta must lie in (0, 1)");
    require(p.near_field_radius_cells >= 1, "near-field radius must be at least one cell");
    require(p.subdivision_depth >= 0 && p.subdivision_depth <= 12, "subdivision depth must lie in [0, 12]");
    require(!(p.truncation_radius <= p.near_field_radius_cells * spacing),
            "finite truncation radius must exceed the near-field radius");
}

/// Surface area of the unit sphere S^{n-1}: 2 for n = 1, 2*pi for n = 2.
inline double unit_sphere_area(int n) { return n == 1 ? 2.0 : 2.0 * std::numbers::pi; }

/// h^n * sigma_{n-1} * R^{-delta} / delta; 0 when R is infinite.
inline double tail_weight_bound(const KernelParams& p, int dim, double spacing) {
    if (!std::isfinite(p.truncation_radius)) return 0.0;
    require(p.truncation_radius > 0, "truncation radius must be positive");
    return std::pow(spacing, dim) * unit_sphere_area(dim) * std::pow(p.truncation_radius, -p.delta) / p.delta;
}

inline double tail_weight_bound(const KernelParams& p, const GridDomain& d) {
    return tail_weight_bound(p, d.dim(), d.spacing());
}

/// Midpoint rule for the unit-cell pair integral
///   int_{[0,1]^n} int_{o+[0,1]^n} |x - y|^{-(n+delta)} dy dx
/// after splitting both cells into 2^depth children per axis. The sum over
/// child pairs only depends on the child offset, weighted by multiplicity.
inline double unit_pair_midpoint(std::array<int, 2> offset, int dim, double delta, int depth) {
    const int m = 1 << depth;
    const double s = 1.0 / m;
    const double expo = -(dim + delta) / 2;
    CompensatedSum sum;
    if (dim == 1) {
        for (int dx = -m + 1; dx < m; ++dx) {
            const double x = offset[0] + dx * s;
            sum += (m - std::abs(dx)) * std::pow(x * x, expo);
        }
        return sum.value() * s * s;
    }
    for (int dy = -m + 1; dy < m; ++dy) {
        const double y = offset[1] + dy * s;
        for (int dx = -m + 1; dx < m; ++dx) {
            const double x = offset[0] + dx * s;
            sum += static_cast<double>((m - std::abs(dx)) * (m - std::abs(dy))) * std::pow(x * x + y * y, expo);
        }
    }
    return sum.value() * s * s * s * s;
}

/// Unit-cell pair integral from `depth` levels of subdivision followed by
/// Richardson elimination of the known error exponents. For cells that
/// share a face, edge or corner the midpoint error is dominated by the
/// contact set, which scales like 2^{-depth (t - delta)} where t counts
/// the non-zero offset components; the smooth remainder scales like 4^{-depth}.
inline double unit_pair_integral(std::array<int, 2> offset, int dim, double delta, int depth) {
    if (dim == 1) offset[1] = 0;
    const bool touching = std::abs(offset[0]) <= 1 && std::abs(offset[1]) <= 1;
    std::vector<double> rates;
    if (touching) {
        const int t = (offset[0] != 0) + (offset[1] != 0);
        for (int j = t; j <= dim; ++j) rates.push_back(j - delta);
    }
    for (double p : {2.0, 4.0, 6.0}) rates.push_back(p);

    std::vector<double> level;
    for (int k = 0; k <= depth; ++k) level.push_back(unit_pair_midpoint(offset, dim, delta, k));
    for (double p : rates) {
        if (level.size() < 2) break;
        const double f = std::exp2(p);
        for (std::size_t i = 0; i + 1 < level.size(); ++i) level[i] = (f * level[i + 1] - level[i]) / (f - 1);
        level.pop_back();
    }
    return level.back();
}

/// One entry of the materialized pair list.
struct PairWeight {
    std::int32_t i; ///< G-index, i < j
    std::int32_t j;
    double w;
};

/// Pairwise weights w_ij ~ int_{cell i} int_{cell j} |x-y|^{-(n+delta)} on
/// a domain. On a uniform grid the weight only depends on the absolute
/// offset between the two cells, so the table is stored per offset and the
/// unordered pair list is generated from it on demand.
class KernelTable {
public:
    KernelTable(DomainPtr domain, KernelParams params, std::size_t max_pairs)
        : domain_(std::move(domain)), params_(params) {
        const auto& d = *domain_;
        validate(params_, d.spacing());
        const double g = static_cast<double>(d.g_count());
        if (g * (g - 1) / 2 > static_cast<double>(max_pairs))
            throw CapacityExceeded("kernel pair table would exceed the cap of " + std::to_string(max_pairs) +
                                   " pairs");

        const int n = d.dim();
        const double h = d.spacing();
        nx_ = d.shape()[0];
        ny_ = d.shape()[1];
        keep_radius_cells_ = std::isfinite(params_.truncation_radius)
                                 ? params_.truncation_radius / h + 0.5 * std::sqrt(static_cast<double>(n))
                                 : std::numeric_limits<double>::infinity();
        const double near = params_.near_field_radius_cells;
        const double hscale = std::pow(h, n - params_.delta);
        const double h2n = std::pow(h, 2 * n);
        table_.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
        for (int oy = 0; oy < ny_; ++oy)
            for (int ox = 0; ox < nx_; ++ox) {
                if (ox == 0 && oy == 0) continue;
                const double dist_cells = std::hypot(static_cast<double>(ox), static_cast<double>(oy));
                if (dist_cells > keep_radius_cells_) continue;
                double w;
                if (dist_cells < near)
                    w = hscale * unit_pair_integral({ox, oy}, n, params_.delta, params_.subdivision_depth);
                else
                    w = h2n / std::pow(std::hypot(ox * h, oy * h), n + params_.delta);
                table_[static_cast<std::size_t>(ox) + static_cast<std::size_t>(nx_) * oy] = w;
            }
        tail_ = tail_weight_bound(params_, d);

        const auto cells = d.g_cells();
        gx_.resize(cells.size());
        gy_.resize(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto [x, y] = d.coords(static_cast<std::size_t>(cells[i]));
            gx_[i] = x;
            gy_[i] = y;
        }
    }

    [[nodiscard]] const DomainPtr& domain() const noexcept { return domain_; }
    [[nodiscard]] const KernelParams& params() const noexcept { return params_; }
    [[nodiscard]] double tail_bound_per_cell() const noexcept { return tail_; }
    [[nodiscard]] bool truncated() const noexcept { return std::isfinite(params_.truncation_radius); }
    [[nodiscard]] std::size_t size() const noexcept { return gx_.size(); }

    /// Weight for a cell offset (any signs).
    [[nodiscard]] double offset_weight(int dx, int dy) const noexcept {
        return table_[static_cast<std::size_t>(std::abs(dx)) + static_cast<std::size_t>(nx_) * std::abs(dy)];
    }

    /// Weight between two G-cells given by G-index; 0 for i == j and for
    /// truncated pairs.
    [[nodiscard]] double weight(std::size_t i, std::size_t j) const noexcept {
        return offset_weight(gx_[i] - gx_[j], gy_[i] - gy_[j]);
    }

    /// Calls f(j, w_ij) for every j > i with positive weight.
    template <class F>
    void for_each_partner_above(std::size_t i, F&& f) const {
        const int xi = gx_[i], yi = gy_[i];
        const std::size_t nx = static_cast<std::size_t>(nx_);
        const double* tab = table_.data();
        for (std::size_t j = i + 1; j < gx_.size(); ++j) {
            const double w = tab[static_cast<std::size_t>(std::abs(gx_[j] - xi)) + nx * std::abs(gy_[j] - yi)];
            if (w > 0) f(j, w);
        }
    }

    /// Calls f(i, j, w_ij) for every unordered pair i < j with positive weight.
    template <class F>
    void for_each_pair(F&& f) const {
        for (std::size_t i = 0; i < gx_.size(); ++i)
            for_each_partner_above(i, [&](std::size_t j, double w) { f(i, j, w); });
    }

    [[nodiscard]] std::size_t pair_count() const {
        std::size_t n = 0;
        for_each_pair([&](std::size_t, std::size_t, double) { ++n; });
        return n;
    }

    /// Flat pair list sorted by first index, then second.
    [[nodiscard]] std::vector<PairWeight> pairs() const {
        std::vector<PairWeight> out;
        for_each_pair([&](std::size_t i, std::size_t j, double w) {
            out.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), w});
        });
        return out;
    }

    /// Sum over j != i of w_ij for a single cell.
    [[nodiscard]] double row_mass(std::size_t i) const {
        CompensatedSum s;
        for (std::size_t j = 0; j < gx_.size(); ++j)
            if (j != i) s += weight(i, j);
        return s.value();
    }

private:
    DomainPtr domain_;
    KernelParams params_;
    int nx_ = 1, ny_ = 1;
    double keep_radius_cells_ = 0;
    double tail_ = 0;
    std::vector<double> table_;
    std::vector<int> gx_, gy_;
};

inline constexpr std::size_t kDefaultMaxPairs = std::size_t{1} << 26;

inline KernelTable build_kernel(DomainPtr domain, const KernelParams& params,
                                std::size_t max_pairs = kDefaultMaxPairs) {
    return KernelTable(std::move(domain), params, max_pairs);
}

// Binary dump: "FGKT" magic, u32 version, u32 dim, f64 h, f64 delta,
// u32 k, u32 m, f64 R, u64 pair count, then (u32 i, u32 j, f64 w) records.
// All fields little-endian.

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw Error("truncated kernel dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}
} // namespace detail

struct KernelDump {
    int dim = 0;
    double spacing = 0;
    KernelParams params;
    std::vector<PairWeight> pairs;
};

inline void write_kernel_dump(std::ostream& os, const KernelTable& k) {
    const auto& p = k.params();
    os.write("FGKT", 4);
    detail::put_le<std::uint32_t>(os, 1);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.domain()->dim()));
    detail::put_le<double>(os, k.domain()->spacing());
    detail::put_le<double>(os, p.delta);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.near_field_radius_cells));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.subdivision_depth));
    detail::put_le<double>(os, p.truncation_radius);
    const auto pairs = k.pairs();
    detail::put_le<std::uint64_t>(os, pairs.size());
    for (const auto& pw : pairs) {
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(pw.i));
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(pw.j));
        detail::put_le<double>(os, pw.w);
    }
}

inline KernelDump read_kernel_dump(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != "FGKT") throw Error("not a kernel dump");
    if (detail::get_le<std::uint32_t>(is) != 1) throw Error("unsupported kernel dump version");
    KernelDump d;
    d.dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
    d.spacing = detail::get_le<double>(is);
    d.params.delta = detail::get_le<double>(is);
    d.params.near_field_radius_cells = static_cast<int>(detail::get_le<std::uint32_t>(is));
    d.params.subdivision_depth = static_cast<int>(detail::get_le<std::uint32_t>(is));
    d.params.truncation_radius = detail::get_le<double>(is);
    const auto n = detail::get_le<std::uint64_t>(is);
    d.pairs.reserve(n);
    for (std::uint64_t r = 0; r < n; ++r) {
        PairWeight pw{};
        pw.i = static_cast<std::int32_t>(detail::get_le<std::uint32_t>(is));
        pw.j = static_cast<std::int32_t>(detail::get_le<std::uint32_t>(is));
        pw.w = detail::get_le<double>(is);
        d.pairs.push_back(pw);
    }
    return d;
}

} // namespace fracgeo
