#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "lp.hpp"
#include "maxflow.hpp"

namespace fracgeo {

using KernelPtr = std::shared_ptr<const KernelTable>;

/// Boundary layer of G widened to `width` cells (Chebyshev dilation inside G).
inline CellSet zero_layer(const DomainPtr& d, int width = 1) {
    require(width >= 1, "zero layer width must be at least one cell");
    CellSet out = boundary_layer_set(d);
    for (int step = 1; step < width; ++step) {
        CellSet grown = out;
        for (std::size_t c = 0; c < d->cell_count(); ++c) {
            if (!out.contains(c)) continue;
            const auto [ix, iy] = d->coords(c);
            for (int dy = (d->dim() == 2 ? -1 : 0); dy <= (d->dim() == 2 ? 1 : 0); ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (d->is_g(ix + dx, iy + dy)) grown.insert(d->linear(ix + dx, iy + dy));
        }
        out = std::move(grown);
    }
    return out;
}

/// Discrete capacity problem: minimize the W^{delta,1} energy over fields
/// equal to 1 on K and 0 on the zero set.
struct CapacityProblem {
    KernelPtr kern;
    CellSet K;
    CellSet zero_set;

    CapacityProblem(KernelPtr k, CellSet compact, CellSet zeros)
        : kern(std::move(k)), K(std::move(compact)), zero_set(std::move(zeros)) {
        if (K.domain() != kern->domain() || zero_set.domain() != kern->domain()) throw DomainMismatch();
    }

    /// Problem whose admissible fields vanish on the boundary layer.
    static CapacityProblem with_boundary_zero(KernelPtr k, CellSet compact, int width = 1) {
        auto zeros = zero_layer(k->domain(), width);
        return CapacityProblem(std::move(k), std::move(compact), std::move(zeros));
    }

    [[nodiscard]] const DomainPtr& domain() const { return kern->domain(); }
    [[nodiscard]] bool feasible() const { return !K.intersects(zero_set); }
};

enum class CapacityMethod { MinCut, LP, Covering };

inline const char* to_string(CapacityMethod m) {
    switch (m) {
    case CapacityMethod::MinCut: return "mincut";
    case CapacityMethod::LP: return "lp";
    case CapacityMethod::Covering: return "covering";
    }
    return "?";
}

/// Split of a certificate energy into the D x (G \ D) cross term and the
/// (G \ D) x (G \ D) remainder.
struct EnergySplit {
    double cross_term = 0;
    double two_perimeter = 0;
    double remainder = 0;
};

struct CapacityResult {
    /// Full discrete |u|_{W^{delta,1}} of the returned minimizer/certificate;
    /// +inf when infeasible.
    double value = 0;
    CellSet minimizer;
    std::optional<ScalarField> certificate;
    CapacityMethod method = CapacityMethod::MinCut;
    bool infeasible = false;
    /// Solver-side value (flow, LP objective) before re-evaluation.
    double solver_value = 0;
    std::optional<EnergySplit> split;
};

inline constexpr std::size_t kDefaultMaxFlowNodes = 8192;
inline constexpr std::size_t kMaxLpCells = 512;

namespace detail {

enum class Role : std::uint8_t { Free, Source, Sink };

inline std::vector<Role> roles(const CapacityProblem& prob) {
    const auto cells = prob.domain()->g_cells();
    std::vector<Role> r(cells.size(), Role::Free);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto c = static_cast<std::size_t>(cells[i]);
        if (prob.K.contains(c)) r[i] = Role::Source;
        else if (prob.zero_set.contains(c)) r[i] = Role::Sink;
    }
    return r;
}

inline CapacityResult infeasible_result(const CapacityProblem& prob, CapacityMethod m) {
    CapacityResult r{std::numeric_limits<double>::infinity(), CellSet(prob.domain()), std::nullopt, m, true, 0, {}};
    return r;
}

} // namespace detail

/// Exact discrete capacity by minimum s-t cut. K cells are merged into the
/// source and zero-set cells into the sink; every remaining pair becomes an
/// undirected arc of capacity 2 w_ij.
inline CapacityResult solve_mincut(const CapacityProblem& prob, std::size_t max_nodes = kDefaultMaxFlowNodes) {
    if (!prob.feasible()) return detail::infeasible_result(prob, CapacityMethod::MinCut);
    const auto& dom = prob.domain();
    if (prob.K.empty()) return {0.0, CellSet(dom), std::nullopt, CapacityMethod::MinCut, false, 0.0, {}};

    const auto role = detail::roles(prob);
    std::vector<std::size_t> node(role.size(), 0);
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < role.size(); ++i)
        if (role[i] == detail::Role::Free) node[i] = free_count++;
    if (free_count + 2 > max_nodes)
        throw CapacityExceeded("flow network with " + std::to_string(free_count + 2) + " nodes exceeds the cap of " +
                               std::to_string(max_nodes));

    const std::size_t S = free_count, T = free_count + 1;
    DenseMaxFlow flow(free_count + 2);
    CompensatedSum fixed_cut;
    prob.kern->for_each_pair([&](std::size_t i, std::size_t j, double w) {
        const double c = 2 * w;
        const auto ri = role[i], rj = role[j];
        using detail::Role;
        if (ri == Role::Free && rj == Role::Free) flow.add_undirected(node[i], node[j], c);
        else if (ri == Role::Free) flow.add_edge(rj == Role::Source ? S : node[i], rj == Role::Source ? node[i] : T, c);
        else if (rj == Role::Free) flow.add_edge(ri == Role::Source ? S : node[j], ri == Role::Source ? node[j] : T, c);
        else if (ri != rj) fixed_cut += c;
    });
    const double flow_value = flow.solve(S, T) + fixed_cut.value();
    const auto side = flow.source_side();

    CellSet S_set(dom);
    const auto cells = dom->g_cells();
    for (std::size_t i = 0; i < role.size(); ++i)
        if (role[i] == detail::Role::Source || (role[i] == detail::Role::Free && side[node[i]]))
            S_set.insert(static_cast<std::size_t>(cells[i]));

    CapacityResult r{2 * perimeter(S_set, *prob.kern), std::move(S_set), std::nullopt, CapacityMethod::MinCut,
                     false, flow_value, {}};
    return r;
}

/// Capacity from the linear relaxation over 0 <= u <= 1. The LP is solved
/// through its dual (bounded flows f_p on the pairs, one equality row per
/// free cell); the row multipliers are the optimal u.
inline CapacityResult solve_lp(const CapacityProblem& prob, std::size_t max_cells = kMaxLpCells) {
    const auto& dom = prob.domain();
    if (dom->g_count() > max_cells)
        throw CapacityExceeded("LP oracle is limited to " + std::to_string(max_cells) + " cells");
    if (!prob.feasible()) return detail::infeasible_result(prob, CapacityMethod::LP);
    if (prob.K.empty()) return {0.0, CellSet(dom), std::nullopt, CapacityMethod::LP, false, 0.0, {}};

    const auto role = detail::roles(prob);
    std::vector<int> row(role.size(), -1);
    int rows = 0;
    for (std::size_t i = 0; i < role.size(); ++i)
        if (role[i] == detail::Role::Free) row[i] = rows++;

    auto fixed_value = [&](std::size_t i) { return role[i] == detail::Role::Source ? 1.0 : 0.0; };

    lp::BoundedProblem P;
    P.rows = rows;
    P.rhs.assign(rows, 0.0);
    CompensatedSum constant; // both ends fixed, plus the shift f = x - c
    double cmax = 0;
    prob.kern->for_each_pair([&](std::size_t, std::size_t, double w) { cmax = std::max(cmax, 2 * w); });
    const double scale = cmax > 0 ? 1.0 / cmax : 1.0;

    prob.kern->for_each_pair([&](std::size_t i, std::size_t j, double w) {
        const double c = 2 * w * scale;
        const double kappa = fixed_value(i) - fixed_value(j);
        if (row[i] < 0 && row[j] < 0) {
            constant += c * std::abs(kappa);
            return;
        }
        lp::Column col;
        if (row[i] >= 0) col.entries.emplace_back(row[i], 1.0);
        if (row[j] >= 0) col.entries.emplace_back(row[j], -1.0);
        for (auto [r, a] : col.entries) P.rhs[r] += a * c;
        P.columns.push_back(std::move(col));
        P.cost.push_back(-kappa);
        P.upper.push_back(2 * c);
        constant += -kappa * c; // -(kappa * c) from the shift, negated below
    });
    for (int r = 0; r < rows; ++r) {
        P.columns.push_back(lp::Column{{{r, 1.0}}}); // t_r
        P.cost.push_back(1.0);
        P.upper.push_back(std::numeric_limits<double>::infinity());
        P.columns.push_back(lp::Column{{{r, -1.0}}}); // r_r
        P.cost.push_back(0.0);
        P.upper.push_back(std::numeric_limits<double>::infinity());
    }

    double lp_value = constant.value() / scale;
    std::vector<double> u(rows, 0.0);
    if (rows > 0) {
        const auto sol = lp::solve(P);
        lp_value = (constant.value() - sol.objective()) / scale;
        u = sol.y;
    }

    CellSet S_set(dom);
    ScalarField field(dom);
    const auto cells = dom->g_cells();
    for (std::size_t i = 0; i < role.size(); ++i) {
        const double ui = role[i] == detail::Role::Free ? std::clamp(u[static_cast<std::size_t>(row[i])], 0.0, 1.0)
                                                        : fixed_value(i);
        field[i] = ui;
        if (ui > 0.5) S_set.insert(static_cast<std::size_t>(cells[i]));
    }
    CapacityResult r{lp_value, std::move(S_set), std::move(field), CapacityMethod::LP, false, lp_value, {}};
    return r;
}

/// Radial profile psi: 1 on |x| <= 1, 2 - |x| on 1 < |x| < 2, 0 beyond.
inline double bump_profile(double r) { return std::clamp(2.0 - r, 0.0, 1.0); }

/// Admissible test field u = min{1, sum_B psi^B} from a finite ball cover
/// of the closure of D: interior balls B(z, dist(z, dD)/3) at every D-cell
/// centre and boundary balls of radius `boundary_radius` at the midpoints
/// of the faces separating D from its complement. Its energy is an upper
/// bound on cap(D); the split shows how far it is from 2 P(D).
inline CapacityResult covering_certificate(const CellSet& D, const CapacityProblem& templ, double boundary_radius) {
    const auto& dom = templ.domain();
    if (D.domain() != dom) throw DomainMismatch();
    require(boundary_radius > 0, "boundary ball radius must be positive");
    require(!D.empty(), "covering certificate needs a non-empty set");
    const auto& d = *dom;
    const int dim = d.dim();
    const double h = d.spacing();
    {
        const CellSet guard = zero_layer(dom, 1);
        for (std::size_t c = 0; c < d.cell_count(); ++c) {
            if (!D.contains(c)) continue;
            const auto [ix, iy] = d.coords(c);
            for (int dy = (dim == 2 ? -2 : 0); dy <= (dim == 2 ? 2 : 0); ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int x = ix + dx, y = iy + dy;
                    if (!d.in_grid(x, y) || guard.contains(d.linear(x, y)) || templ.zero_set.contains(d.linear(x, y)))
                        throw InvalidArgument("set touches the zero layer; no admissible cover exists on this grid");
                }
        }
    }

    std::vector<double> g(d.cell_count(), 0.0);
    auto stamp = [&](const Point& c, double radius) {
        const int reach = static_cast<int>(std::ceil(2 * radius / h)) + 1;
        const int cx = static_cast<int>(std::floor((c[0] - d.origin()[0]) / h));
        const int cy = dim == 2 ? static_cast<int>(std::floor((c[1] - d.origin()[1]) / h)) : 0;
        for (int y = cy - (dim == 2 ? reach : 0); y <= cy + (dim == 2 ? reach : 0); ++y)
            for (int x = cx - reach; x <= cx + reach; ++x) {
                if (!d.in_grid(x, y)) continue;
                const std::size_t cell = d.linear(x, y);
                const Point p = d.center(cell);
                const double dist = std::hypot(p[0] - c[0], dim == 2 ? p[1] - c[1] : 0.0);
                g[cell] += bump_profile(dist / radius);
            }
    };

    // Interior balls. dist(z, dD) is the distance to the nearest closed
    // non-D cell (cells outside the grid are never closer than that).
    std::vector<std::size_t> outside;
    for (std::size_t c = 0; c < d.cell_count(); ++c)
        if (!D.contains(c)) outside.push_back(c);
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        if (!D.contains(c)) continue;
        const auto [ix, iy] = d.coords(c);
        double best = INFINITY;
        for (std::size_t o : outside) {
            const auto [ox, oy] = d.coords(o);
            const double gx = std::max(0.0, std::abs(ox - ix) - 0.5) * h;
            const double gy = std::max(0.0, std::abs(oy - iy) - 0.5) * h;
            best = std::min(best, std::hypot(gx, gy));
        }
        stamp(d.center(c), best / 3);
    }

    // Boundary balls at face midpoints between D and non-D cells.
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        if (!D.contains(c)) continue;
        const auto [ix, iy] = d.coords(c);
        const Point z = d.center(c);
        const int faces[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (int f = 0; f < (dim == 2 ? 4 : 2); ++f) {
            const int x = ix + faces[f][0], y = iy + faces[f][1];
            if (d.in_grid(x, y) && D.contains(d.linear(x, y))) continue;
            stamp({z[0] + faces[f][0] * h / 2, z[1] + faces[f][1] * h / 2}, boundary_radius);
        }
    }

    ScalarField u(dom);
    const auto cells = d.g_cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto c = static_cast<std::size_t>(cells[i]);
        u[i] = D.contains(c) ? 1.0 : std::min(1.0, g[c]);
        if (templ.zero_set.contains(c) && u[i] != 0.0)
            throw InvalidArgument("boundary balls reach the zero layer; use a smaller radius");
    }

    std::vector<std::uint8_t> in_d(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) in_d[i] = D.contains(static_cast<std::size_t>(cells[i]));
    CompensatedSum cross, rest;
    templ.kern->for_each_pair([&](std::size_t i, std::size_t j, double w) {
        if (in_d[i] && in_d[j]) return;
        const double term = 2 * w * std::abs(u[i] - u[j]);
        if (in_d[i] || in_d[j]) cross += term;
        else rest += term;
    });

    EnergySplit split{cross.value(), 2 * perimeter(D, *templ.kern), rest.value()};
    const double energy = seminorm(u, *templ.kern, 1.0);
    CapacityResult r{energy, u.at_least(1.0), std::move(u), CapacityMethod::Covering, false, energy, split};
    return r;
}

/// One row of the capacity-versus-perimeter comparison.
struct CapPerimeterRow {
    double capacity = 0;
    double two_perimeter = 0;
    double ratio = 0;
    bool pass = false;
};

inline constexpr double kRelativeSlack = 1e-9;

/// Requires at least two cells between D and the boundary layer.
inline void require_compact_inside(const CellSet& D) {
    const auto& d = *D.domain();
    const auto bl = d.boundary_layer();
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        if (!D.contains(c)) continue;
        const auto [ix, iy] = d.coords(c);
        for (int dy = (d.dim() == 2 ? -2 : 0); dy <= (d.dim() == 2 ? 2 : 0); ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                const int x = ix + dx, y = iy + dy;
                if (!d.in_grid(x, y) || bl[d.linear(x, y)])
                    throw InvalidArgument("set must keep a two-cell gap to the boundary layer");
            }
    }
}

/// cap(D) with K = D and the boundary layer as zero set, against 2 P(D).
inline CapPerimeterRow cap_vs_perimeter_check(const CellSet& D, const KernelPtr& kern) {
    if (D.domain() != kern->domain()) throw DomainMismatch();
    require_compact_inside(D);
    const auto prob = CapacityProblem::with_boundary_zero(kern, D);
    CapPerimeterRow row;
    row.capacity = solve_mincut(prob).value;
    row.two_perimeter = 2 * perimeter(D, *kern);
    row.ratio = row.two_perimeter > 0 ? row.capacity / row.two_perimeter : 0.0;
    row.pass = row.capacity <= row.two_perimeter * (1 + kRelativeSlack);
    return row;
}

} // namespace fracgeo
