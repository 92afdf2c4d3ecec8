#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "error.hpp"

namespace fracgeo {

/// Highest-label push-relabel maximum flow on a dense graph.
///
/// Only the first phase (maximum preflow) is run: it already determines
/// the minimum cut, which is all the capacity solver needs. Capacities are
/// doubles; residuals below `eps` count as saturated, where eps is a tiny
/// multiple of the total capacity.
class DenseMaxFlow {
public:
    explicit DenseMaxFlow(std::size_t nodes) : n_(nodes), res_(nodes * nodes, 0.0) {
        require(nodes >= 2, "flow network needs at least two nodes");
    }

    [[nodiscard]] std::size_t nodes() const noexcept { return n_; }

    void add_edge(std::size_t u, std::size_t v, double cap) {
        require(cap >= 0 && std::isfinite(cap), "edge capacity must be finite and non-negative");
        res_[u * n_ + v] += cap;
        total_ += cap;
    }
    /// Undirected edge: capacity `cap` in both directions.
    void add_undirected(std::size_t u, std::size_t v, double cap) {
        add_edge(u, v, cap);
        add_edge(v, u, cap);
    }

    /// Computes the maximum preflow from s to t and returns its value.
    double solve(std::size_t s, std::size_t t) {
        require(s != t && s < n_ && t < n_, "invalid terminals");
        s_ = s;
        t_ = t;
        eps_ = std::max(total_, 1e-300) * 1e-15;
        height_.assign(n_, 0);
        excess_.assign(n_, 0.0);
        current_.assign(n_, 0);
        buckets_.assign(2 * n_ + 1, {});
        count_.assign(2 * n_ + 1, 0);

        global_relabel();
        for (std::size_t v = 0; v < n_; ++v) {
            const double c = res_[s * n_ + v];
            if (v == s || c <= 0) continue;
            res_[s * n_ + v] = 0;
            res_[v * n_ + s] += c;
            excess_[v] += c;
        }
        for (std::size_t v = 0; v < n_; ++v) activate(v);

        std::size_t relabels = 0;
        while (highest_ > 0 || !buckets_[0].empty()) {
            if (buckets_[highest_].empty()) {
                --highest_;
                continue;
            }
            const std::size_t u = buckets_[highest_].back();
            buckets_[highest_].pop_back();
            if (height_[u] != highest_ || excess_[u] <= eps_) continue;
            if (discharge(u)) {
                if (++relabels % n_ == 0) {
                    global_relabel();
                    for (std::size_t v = 0; v < n_; ++v) activate(v);
                }
            }
        }
        return excess_[t_];
    }

    /// Source side of the minimum cut: nodes that cannot reach t in the
    /// residual graph.
    [[nodiscard]] std::vector<std::uint8_t> source_side() const {
        std::vector<std::uint8_t> reach_t(n_, 0);
        std::deque<std::size_t> q{t_};
        reach_t[t_] = 1;
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop_front();
            for (std::size_t u = 0; u < n_; ++u)
                if (!reach_t[u] && res_[u * n_ + v] > eps_) {
                    reach_t[u] = 1;
                    q.push_back(u);
                }
        }
        for (auto& b : reach_t) b = !b;
        return reach_t;
    }

private:
    void activate(std::size_t v) {
        if (v == s_ || v == t_ || excess_[v] <= eps_ || height_[v] >= n_) return;
        buckets_[height_[v]].push_back(v);
        highest_ = std::max(highest_, height_[v]);
    }

    // Exact distance-to-sink labels; nodes that cannot reach t are lifted to n.
    void global_relabel() {
        std::fill(height_.begin(), height_.end(), n_);
        std::fill(count_.begin(), count_.end(), 0);
        for (auto& b : buckets_) b.clear();
        highest_ = 0;
        height_[t_] = 0;
        std::deque<std::size_t> q{t_};
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop_front();
            for (std::size_t u = 0; u < n_; ++u)
                if (height_[u] == n_ && u != s_ && res_[u * n_ + v] > eps_) {
                    height_[u] = height_[v] + 1;
                    q.push_back(u);
                }
        }
        height_[s_] = n_;
        for (std::size_t v = 0; v < n_; ++v) {
            ++count_[height_[v]];
            current_[v] = 0;
        }
    }

    // Pushes excess out of u; returns true when u was relabelled.
    bool discharge(std::size_t u) {
        double* row = &res_[u * n_];
        while (excess_[u] > eps_) {
            std::size_t& v = current_[u];
            if (v == n_) {
                relabel(u);
                if (height_[u] >= n_) return true;
                buckets_[height_[u]].push_back(u);
                highest_ = std::max(highest_, height_[u]);
                return true;
            }
            if (row[v] > eps_ && height_[u] == height_[v] + 1) {
                const double delta = std::min(excess_[u], row[v]);
                row[v] -= delta;
                res_[v * n_ + u] += delta;
                excess_[u] -= delta;
                const bool was_idle = excess_[v] <= eps_;
                excess_[v] += delta;
                if (was_idle) activate(v);
                if (excess_[u] <= eps_) break;
            }
            ++v;
        }
        return false;
    }

    void relabel(std::size_t u) {
        const std::size_t old = height_[u];
        std::size_t best = 2 * n_;
        const double* row = &res_[u * n_];
        for (std::size_t v = 0; v < n_; ++v)
            if (row[v] > eps_) best = std::min(best, height_[v] + 1);
        --count_[old];
        height_[u] = std::min(best, n_);
        ++count_[height_[u]];
        current_[u] = 0;
        if (count_[old] == 0 && old < n_) {
            // gap: nothing at `old` can reach the sink any more
            for (std::size_t v = 0; v < n_; ++v)
                if (height_[v] > old && height_[v] < n_) {
                    --count_[height_[v]];
                    height_[v] = n_;
                    ++count_[n_];
                }
        }
    }

    std::size_t n_;
    std::vector<double> res_;
    double total_ = 0;
    double eps_ = 0;
    std::size_t s_ = 0, t_ = 1;
    std::vector<std::size_t> height_;
    std::vector<double> excess_;
    std::vector<std::size_t> current_;
    std::vector<std::vector<std::size_t>> buckets_;
    std::vector<std::size_t> count_;
    std::size_t highest_ = 0;
};

} // namespace fracgeo
