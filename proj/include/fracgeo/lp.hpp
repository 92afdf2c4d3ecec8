#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace fracgeo::lp {

/// Sparse column of the constraint matrix.
struct Column {
    std::vector<std::pair<int, double>> entries; ///< (row, value)
};

/// min c^T x  subject to  A x = b,  0 <= x <= upper  (upper may be +inf).
///
/// Meant for problems with few rows and many sparse columns: the normal
/// equations are rows x rows and dense.
struct BoundedProblem {
    int rows = 0;
    std::vector<Column> columns;
    std::vector<double> cost;
    std::vector<double> upper;
    std::vector<double> rhs;
};

struct Solution {
    std::vector<double> x;
    std::vector<double> y; ///< equality multipliers
    double primal_objective = 0;
    double dual_objective = 0;
    int iterations = 0;
    [[nodiscard]] double objective() const { return 0.5 * (primal_objective + dual_objective); }
};

struct Options {
    double feasibility_tol = 1e-10;
    double gap_tol = 1e-11;
    int max_iterations = 200;
    /// On numerical breakdown the best iterate is accepted if its residuals
    /// and gap are all below this.
    double fallback_tol = 1e-9;
};

/// Mehrotra predictor-corrector primal-dual interior-point method.
inline Solution solve(const BoundedProblem& p, const Options& opt = {}) {
    const int m = p.rows;
    const std::size_t n = p.columns.size();
    require(p.cost.size() == n && p.upper.size() == n, "cost/upper size mismatch");
    require(static_cast<int>(p.rhs.size()) == m, "rhs size mismatch");

    std::vector<char> bounded(n);
    for (std::size_t j = 0; j < n; ++j) {
        require(p.upper[j] > 0, "upper bounds must be positive");
        bounded[j] = std::isfinite(p.upper[j]);
    }

    auto mul_a = [&](const std::vector<double>& v) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        for (std::size_t j = 0; j < n; ++j)
            for (auto [r, a] : p.columns[j].entries) out[r] += a * v[j];
        return out;
    };
    auto mul_at = [&](const Eigen::VectorXd& y, std::size_t j) {
        double s = 0;
        for (auto [r, a] : p.columns[j].entries) s += a * y[r];
        return s;
    };

    std::vector<double> x(n), z(n, 1.0), w(n, 0.0), s(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (bounded[j]) {
            x[j] = 0.5 * p.upper[j];
            w[j] = p.upper[j] - x[j];
            s[j] = 1.0;
        } else {
            x[j] = 1.0;
        }
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(p.rhs.data(), m);

    double norm_b = b.norm(), norm_c = 0, norm_u = 0;
    for (std::size_t j = 0; j < n; ++j) {
        norm_c += p.cost[j] * p.cost[j];
        if (bounded[j]) norm_u += p.upper[j] * p.upper[j];
    }
    norm_c = std::sqrt(norm_c);
    norm_u = std::sqrt(norm_u);
    std::size_t n_compl = n;
    for (char bj : bounded) n_compl += bj ? 1 : 0;

    std::vector<double> rc(n), ru(n), theta(n), rho(n);
    std::vector<double> dx(n), dz(n), dw(n), ds(n), dx_a(n), dz_a(n), dw_a(n), ds_a(n), rxz(n), rws(n);
    Solution sol, best;
    double best_merit = INFINITY;
    auto give_up = [&](const char* why) -> Solution {
        if (best_merit < opt.fallback_tol) return best;
        throw Error(std::string("interior-point method failed: ") + why);
    };

    for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd rb = b - mul_a(x);
        double pobj = 0, dobj = b.dot(y), mu = 0, nrc = 0, nru = 0;
        for (std::size_t j = 0; j < n; ++j) {
            rc[j] = p.cost[j] - mul_at(y, j) - z[j] + s[j];
            nrc += rc[j] * rc[j];
            pobj += p.cost[j] * x[j];
            mu += x[j] * z[j];
            if (bounded[j]) {
                ru[j] = p.upper[j] - x[j] - w[j];
                nru += ru[j] * ru[j];
                dobj -= p.upper[j] * s[j];
                mu += w[j] * s[j];
            } else {
                ru[j] = 0;
            }
        }
        mu /= static_cast<double>(n_compl);
        if (!std::isfinite(mu) || !std::isfinite(pobj) || !std::isfinite(dobj)) return give_up("non-finite iterate");
        sol.iterations = it;
        sol.x = x;
        sol.y.assign(y.data(), y.data() + m);
        sol.primal_objective = pobj;
        sol.dual_objective = dobj;
        const double feas = std::max({rb.norm() / (1 + norm_b), std::sqrt(nrc) / (1 + norm_c),
                                      std::sqrt(nru) / (1 + norm_u)});
        const double gap = std::abs(pobj - dobj) / (1 + std::abs(pobj));
        if (feas < opt.feasibility_tol && gap < opt.gap_tol) return sol;
        if (std::max(feas, gap) < best_merit) {
            best_merit = std::max(feas, gap);
            best = sol;
        }
        if (mu < 1e-300) return give_up("complementarity underflow");

        for (std::size_t j = 0; j < n; ++j) {
            const double d = z[j] / x[j] + (bounded[j] ? s[j] / w[j] : 0.0);
            theta[j] = 1.0 / d;
        }
        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& e = p.columns[j].entries;
            for (auto [r1, a1] : e)
                for (auto [r2, a2] : e) normal(r1, r2) += theta[j] * a1 * a2;
        }
        const double reg = 1e-14 * std::max(1.0, normal.diagonal().cwiseAbs().maxCoeff());
        normal.diagonal().array() += reg;
        const Eigen::LDLT<Eigen::MatrixXd> factor(normal);
        if (factor.info() != Eigen::Success) return give_up("singular normal equations");

        // Newton direction for complementarity targets rxz, rws.
        auto direction = [&](std::vector<double>& ddx, std::vector<double>& ddz, std::vector<double>& ddw,
                             std::vector<double>& dds) {
            for (std::size_t j = 0; j < n; ++j) {
                rho[j] = rc[j] - rxz[j] / x[j];
                if (bounded[j]) rho[j] += (rws[j] - s[j] * ru[j]) / w[j];
            }
            Eigen::VectorXd rhs = rb;
            for (std::size_t j = 0; j < n; ++j)
                for (auto [r, a] : p.columns[j].entries) rhs[r] += a * theta[j] * rho[j];
            const Eigen::VectorXd dy = factor.solve(rhs);
            for (std::size_t j = 0; j < n; ++j) {
                ddx[j] = theta[j] * (mul_at(dy, j) - rho[j]);
                ddz[j] = (rxz[j] - z[j] * ddx[j]) / x[j];
                if (bounded[j]) {
                    ddw[j] = ru[j] - ddx[j];
                    dds[j] = (rws[j] - s[j] * ddw[j]) / w[j];
                } else {
                    ddw[j] = dds[j] = 0;
                }
            }
            return dy;
        };
        auto max_step = [&](const std::vector<double>& v, const std::vector<double>& dv, bool only_bounded) {
            double a = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (only_bounded && !bounded[j]) continue;
                if (dv[j] < 0) a = std::min(a, -v[j] / dv[j]);
            }
            return a;
        };

        for (std::size_t j = 0; j < n; ++j) {
            rxz[j] = -x[j] * z[j];
            rws[j] = bounded[j] ? -w[j] * s[j] : 0.0;
        }
        direction(dx_a, dz_a, dw_a, ds_a);
        const double ap = std::min(max_step(x, dx_a, false), max_step(w, dw_a, true));
        const double ad = std::min(max_step(z, dz_a, false), max_step(s, ds_a, true));
        double mu_aff = 0;
        for (std::size_t j = 0; j < n; ++j) {
            mu_aff += (x[j] + ap * dx_a[j]) * (z[j] + ad * dz_a[j]);
            if (bounded[j]) mu_aff += (w[j] + ap * dw_a[j]) * (s[j] + ad * ds_a[j]);
        }
        mu_aff /= static_cast<double>(n_compl);
        const double sigma = std::pow(mu_aff / mu, 3);

        for (std::size_t j = 0; j < n; ++j) {
            rxz[j] = sigma * mu - x[j] * z[j] - dx_a[j] * dz_a[j];
            rws[j] = bounded[j] ? sigma * mu - w[j] * s[j] - dw_a[j] * ds_a[j] : 0.0;
        }
        const Eigen::VectorXd dy = direction(dx, dz, dw, ds);
        const double eta = std::max(0.9, 1.0 - 10 * mu);
        const double step_p = std::min(1.0, eta * std::min(max_step(x, dx, false), max_step(w, dw, true)));
        const double step_d = std::min(1.0, eta * std::min(max_step(z, dz, false), max_step(s, ds, true)));
        for (std::size_t j = 0; j < n; ++j) {
            x[j] += step_p * dx[j];
            z[j] += step_d * dz[j];
            if (bounded[j]) {
                w[j] += step_p * dw[j];
                s[j] += step_d * ds[j];
            }
        }
        y += step_d * dy;
    }
    return give_up("iteration limit reached");
}

} // namespace fracgeo::lp
