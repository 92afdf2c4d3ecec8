#include <gtest/gtest.h>

#include <queue>
#include <random>

#include "fracgeo/maxflow.hpp"

using namespace fracgeo;

namespace {

// Edmonds-Karp on a plain capacity matrix.
double edmonds_karp(std::vector<double> cap, std::size_t n, std::size_t s, std::size_t t) {
    double total = 0;
    for (;;) {
        std::vector<std::size_t> parent(n, n);
        parent[s] = s;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty() && parent[t] == n) {
            const auto u = q.front();
            q.pop();
            for (std::size_t v = 0; v < n; ++v)
                if (parent[v] == n && cap[u * n + v] > 1e-13) {
                    parent[v] = u;
                    q.push(v);
                }
        }
        if (parent[t] == n) return total;
        double bottleneck = INFINITY;
        for (auto v = t; v != s; v = parent[v]) bottleneck = std::min(bottleneck, cap[parent[v] * n + v]);
        for (auto v = t; v != s; v = parent[v]) {
            cap[parent[v] * n + v] -= bottleneck;
            cap[v * n + parent[v]] += bottleneck;
        }
        total += bottleneck;
    }
}

} // namespace

TEST(DenseMaxFlow, TextbookNetwork) {
    DenseMaxFlow f(6);
    f.add_edge(0, 1, 16);
    f.add_edge(0, 2, 13);
    f.add_edge(1, 3, 12);
    f.add_edge(2, 1, 4);
    f.add_edge(2, 4, 14);
    f.add_edge(3, 2, 9);
    f.add_edge(3, 5, 20);
    f.add_edge(4, 3, 7);
    f.add_edge(4, 5, 4);
    EXPECT_DOUBLE_EQ(f.solve(0, 5), 23.0);
    const auto side = f.source_side();
    EXPECT_TRUE(side[0]);
    EXPECT_FALSE(side[5]);
}

TEST(DenseMaxFlow, DisconnectedSinkGivesZero) {
    DenseMaxFlow f(4);
    f.add_edge(0, 1, 5);
    f.add_edge(2, 3, 5);
    EXPECT_EQ(f.solve(0, 3), 0.0);
    const auto side = f.source_side();
    EXPECT_TRUE(side[0] && side[1]);
    EXPECT_FALSE(side[2] || side[3]); // 2 still reaches the sink
}

TEST(DenseMaxFlow, RandomGraphsAgainstEdmondsKarp) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + trial % 25;
        const double density = 0.15 + 0.8 * u(rng);
        DenseMaxFlow f(n);
        std::vector<double> cap(n * n, 0.0);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && u(rng) < density) {
                    const double c = trial % 2 ? std::floor(10 * u(rng)) : u(rng);
                    f.add_edge(a, b, c);
                    cap[a * n + b] += c;
                }
        const double flow = f.solve(0, n - 1);
        const double oracle = edmonds_karp(cap, n, 0, n - 1);
        EXPECT_NEAR(flow, oracle, 1e-12 * std::max(1.0, oracle)) << trial;

        // the reported side is a cut whose capacity equals the flow
        const auto side = f.source_side();
        ASSERT_TRUE(side[0]);
        ASSERT_FALSE(side[n - 1]);
        double cut = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (side[a] && !side[b]) cut += cap[a * n + b];
        EXPECT_NEAR(cut, oracle, 1e-12 * std::max(1.0, oracle)) << trial;
    }
}

TEST(DenseMaxFlow, UndirectedEdges) {
    DenseMaxFlow f(4);
    f.add_undirected(0, 1, 2);
    f.add_undirected(1, 2, 1);
    f.add_undirected(2, 3, 5);
    f.add_undirected(1, 3, 0.5);
    // everything into 0 passes through 1, which receives 1 + 0.5
    EXPECT_DOUBLE_EQ(f.solve(3, 0), 1.5);
}

TEST(DenseMaxFlow, RejectsBadInput) {
    EXPECT_THROW(DenseMaxFlow(1), InvalidArgument);
    DenseMaxFlow f(3);
    EXPECT_THROW(f.add_edge(0, 1, -1), InvalidArgument);
    EXPECT_THROW(f.add_edge(0, 1, INFINITY), InvalidArgument);
    EXPECT_THROW(f.solve(1, 1), InvalidArgument);
}
