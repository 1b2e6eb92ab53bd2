#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "effham/ising.hpp"

namespace effham {

/// A qubit elimination order together with the induced width it attains:
/// the maximum, over elimination steps, of the number of not-yet-eliminated
/// neighbors of the eliminated qubit in the fill-augmented graph.
struct EliminationOrder {
    std::vector<int> order;
    int width = 0;
};

namespace detail {

/// Adjacency bitset over up to 128 vertices.
struct VertexSet {
    std::array<std::uint64_t, 2> w{0, 0};

    void add(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void remove(int i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool contains(int i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
    int count() const { return std::popcount(w[0]) + std::popcount(w[1]); }

    VertexSet intersect(const VertexSet& o) const {
        VertexSet r;
        r.w[0] = w[0] & o.w[0];
        r.w[1] = w[1] & o.w[1];
        return r;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (int word = 0; word < 2; ++word) {
            std::uint64_t x = w[word];
            while (x) {
                const int i = std::countr_zero(x);
                f(word * 64 + i);
                x &= x - 1;
            }
        }
    }
};

}  // namespace detail

/// Greedy min-fill elimination order (ties: min degree, then lowest index).
/// Fill edges are added as vertices are eliminated, so the reported width is
/// the induced width actually attained by the order.
inline EliminationOrder choose_elimination_order(const IsingProblem& problem) {
    const int n = problem.n();
    std::vector<detail::VertexSet> adj(static_cast<std::size_t>(n));
    for (const Coupling& c : problem.couplings()) {
        adj[static_cast<std::size_t>(c.i)].add(c.j);
        adj[static_cast<std::size_t>(c.j)].add(c.i);
    }
    detail::VertexSet active;
    for (int i = 0; i < n; ++i) active.add(i);

    EliminationOrder result;
    result.order.reserve(static_cast<std::size_t>(n));
    for (int step = 0; step < n; ++step) {
        int best = -1, best_fill = -1, best_deg = -1;
        active.for_each([&](int v) {
            const detail::VertexSet nbrs = adj[static_cast<std::size_t>(v)].intersect(active);
            const int deg = nbrs.count();
            // count of neighbor pairs not already adjacent
            int fill = 0;
            nbrs.for_each([&](int u) {
                const detail::VertexSet missing = nbrs.intersect(adj[static_cast<std::size_t>(u)]);
                fill += deg - 1 - missing.count();
            });
            fill /= 2;
            if (best < 0 || fill < best_fill || (fill == best_fill && deg < best_deg)) {
                best = v;
                best_fill = fill;
                best_deg = deg;
            }
        });
        const detail::VertexSet nbrs = adj[static_cast<std::size_t>(best)].intersect(active);
        if (nbrs.count() > result.width) result.width = nbrs.count();
        nbrs.for_each([&](int u) {
            nbrs.for_each([&](int w) {
                if (u != w) adj[static_cast<std::size_t>(u)].add(w);
            });
        });
        active.remove(best);
        result.order.push_back(best);
    }
    return result;
}

}  // namespace effham
