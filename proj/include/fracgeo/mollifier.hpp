#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"
#include "functional.hpp"
#include "kernel.hpp"

namespace fracgeo {

/// Mollifier phi_j with support radius 1/j.
struct MollifierParams {
    int j = 1;
};

/// Radial C^1 bump (1 - r^2)^2 on r < 1.
inline double mollifier_profile(double r) { return r < 1 ? (1 - r * r) * (1 - r * r) : 0.0; }

struct StencilEntry {
    int dx, dy;
    double weight;
};

/// Grid samples of phi_j renormalized to unit mass. A single centre entry
/// when the support radius does not reach a neighbouring cell centre.
inline std::vector<StencilEntry> mollifier_stencil(const MollifierParams& p, int dim, double h) {
    require(p.j >= 1, "mollifier index j must be a positive integer");
    const double radius = 1.0 / p.j;
    const int reach = static_cast<int>(std::ceil(radius / h));
    std::vector<StencilEntry> st;
    double mass = 0;
    for (int dy = (dim == 2 ? -reach : 0); dy <= (dim == 2 ? reach : 0); ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
            const double r = std::hypot(dx * h, dy * h) / radius;
            const double w = mollifier_profile(r);
            if (w > 0) {
                st.push_back({dx, dy, w});
                mass += w;
            }
        }
    for (auto& e : st) e.weight /= mass;
    return st;
}

/// Discrete u * phi_j. The input must vanish wherever the stencil would
/// reach a cell outside G or in the boundary layer, so the result is again
/// compactly supported in G.
inline ScalarField mollify(const ScalarField& u, const MollifierParams& p) {
    const auto& d = *u.domain();
    const auto st = mollifier_stencil(p, d.dim(), d.spacing());
    const auto cells = d.g_cells();
    const auto bl = d.boundary_layer();

    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (u[i] == 0.0) continue;
        const auto [ix, iy] = d.coords(static_cast<std::size_t>(cells[i]));
        for (const auto& e : st) {
            const int x = ix + e.dx, y = iy + e.dy;
            if (!d.is_g(x, y) || bl[d.linear(x, y)])
                throw InvalidArgument("mollified support would leave G; field must vanish near the boundary layer");
        }
    }

    ScalarField out(u.domain());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto [ix, iy] = d.coords(static_cast<std::size_t>(cells[i]));
        CompensatedSum acc;
        for (const auto& e : st) {
            const int x = ix - e.dx, y = iy - e.dy;
            if (!d.in_grid(x, y)) continue;
            const auto g = d.g_index(d.linear(x, y));
            if (g >= 0 && u[static_cast<std::size_t>(g)] != 0.0) acc += e.weight * u[static_cast<std::size_t>(g)];
        }
        out[i] = acc.value();
    }
    return out;
}

struct MollifyScanRow {
    int j = 0;
    double seminorm_distance = 0; ///< |u - u*phi_j|_{W^{delta,1}}
    double l1_distance = 0;       ///< ||u - u*phi_j||_{L^1}
};

inline std::vector<MollifyScanRow> mollify_convergence_scan(const ScalarField& u, const KernelTable& kern,
                                                            const std::vector<int>& j_schedule) {
    check_domain(u.domain(), kern);
    for (std::size_t k = 1; k < j_schedule.size(); ++k)
        require(j_schedule[k] > j_schedule[k - 1], "j schedule must be increasing");
    std::vector<MollifyScanRow> rows;
    for (int j : j_schedule) {
        const ScalarField diff = u - mollify(u, {j});
        rows.push_back({j, seminorm(diff, kern, 1.0), lq_norm(diff, 1.0)});
    }
    return rows;
}

} // namespace fracgeo
