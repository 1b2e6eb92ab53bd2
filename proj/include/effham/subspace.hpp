#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "effham/elimination.hpp"
#include "effham/errors.hpp"
#include "effham/ising.hpp"
#include "effham/spin_config.hpp"

namespace effham {

/// Classical energies within this tolerance count as degenerate. The h and J
/// values are small exact rationals, so true ties differ only by accumulated
/// rounding.
inline constexpr double tie_tolerance = 1e-9;

/// The N_S lowest-energy classical states of a problem, sorted by
/// (energy, lexicographic bits), degeneracy-closed: no state outside the
/// basis ties the topmost included energy.
class SubspaceBasis {
public:
    SubspaceBasis(int n, std::vector<SpinConfig> states, std::vector<double> energies)
        : n_(n), states_(std::move(states)), energies_(std::move(energies)) {
        if (states_.empty() || states_.size() != energies_.size())
            throw ContractViolation("basis states/energies mismatch");
        for (std::size_t i = 0; i + 1 < energies_.size(); ++i)
            if (energies_[i + 1] < energies_[i]) throw ContractViolation("basis energies must be nondecreasing");
        index_.reserve(states_.size() * 2);
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (!index_.emplace(states_[i], static_cast<int>(i)).second)
                throw ContractViolation("duplicate state in basis: " + states_[i].str(n_));
        }
    }

    /// Builds a basis from explicit states, computing and sorting energies.
    /// Degeneracy closure is the caller's responsibility.
    static SubspaceBasis from_states(const IsingProblem& problem, std::vector<SpinConfig> states) {
        std::vector<std::pair<double, SpinConfig>> tagged;
        tagged.reserve(states.size());
        for (const SpinConfig& c : states) tagged.emplace_back(problem.energy(c), c);
        std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return SpinConfig::lex_less(a.second, b.second);
        });
        std::vector<SpinConfig> ss;
        std::vector<double> es;
        for (auto& [e, c] : tagged) {
            es.push_back(e);
            ss.push_back(c);
        }
        return SubspaceBasis(problem.n(), std::move(ss), std::move(es));
    }

    int n() const { return n_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<SpinConfig>& states() const { return states_; }
    const std::vector<double>& energies() const { return energies_; }
    const SpinConfig& state(std::size_t i) const { return states_[i]; }
    double energy(std::size_t i) const { return energies_[i]; }

    /// Index of a configuration in the basis, or -1 if outside.
    int find(const SpinConfig& c) const {
        const auto it = index_.find(c);
        return it == index_.end() ? -1 : it->second;
    }

private:
    int n_;
    std::vector<SpinConfig> states_;
    std::vector<double> energies_;
    std::unordered_map<SpinConfig, int, SpinConfig::Hash> index_;
};

/// Memory budget for the k-best elimination tables.
struct EnumerationLimits {
    /// Cap on (separator table rows) x (list length) for any single bucket.
    std::size_t max_table_entries = 50'000'000;
};

namespace detail {

/// One k-best list element: a partial (or full) assignment and its energy.
/// Lists are kept sorted by (energy, lexicographic bits); that total order
/// makes every truncation deterministic and consistent with the final sort.
struct KBestEntry {
    double energy;
    SpinConfig bits;
};

inline bool entry_less(const KBestEntry& a, const KBestEntry& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return SpinConfig::lex_less(a.bits, b.bits);
}

/// Top-k of all pairwise combinations {a.energy + b.energy, a.bits | b.bits}.
/// Lazy best-first expansion over the index grid; each cell is reached via a
/// unique predecessor, so no visited set is needed.
inline std::vector<KBestEntry> kbest_product(const std::vector<KBestEntry>& a,
                                             const std::vector<KBestEntry>& b, std::size_t k) {
    std::vector<KBestEntry> out;
    if (a.empty() || b.empty() || k == 0) return out;
    if (a.size() == 1) {
        const std::size_t m = std::min(k, b.size());
        out.reserve(m);
        for (std::size_t j = 0; j < m; ++j) out.push_back({a[0].energy + b[j].energy, a[0].bits | b[j].bits});
        return out;
    }
    struct Cell {
        KBestEntry entry;
        std::uint32_t i, j;
    };
    auto cell_greater = [](const Cell& x, const Cell& y) { return entry_less(y.entry, x.entry); };
    std::priority_queue<Cell, std::vector<Cell>, decltype(cell_greater)> heap(cell_greater);
    heap.push({{a[0].energy + b[0].energy, a[0].bits | b[0].bits}, 0, 0});
    out.reserve(std::min(k, a.size() * b.size()));
    while (!heap.empty() && out.size() < k) {
        const Cell c = heap.top();
        heap.pop();
        out.push_back(c.entry);
        if (c.i + 1 < a.size())
            heap.push({{a[c.i + 1].energy + b[c.j].energy, a[c.i + 1].bits | b[c.j].bits}, c.i + 1, c.j});
        if (c.i == 0 && c.j + 1 < b.size())
            heap.push({{a[0].energy + b[c.j + 1].energy, a[0].bits | b[c.j + 1].bits}, 0, c.j + 1});
    }
    return out;
}

/// Top-k union of two sorted lists.
inline std::vector<KBestEntry> kbest_union(const std::vector<KBestEntry>& a, const std::vector<KBestEntry>& b,
                                           std::size_t k) {
    std::vector<KBestEntry> out;
    out.reserve(std::min(k, a.size() + b.size()));
    std::size_t i = 0, j = 0;
    while (out.size() < k && (i < a.size() || j < b.size())) {
        if (j == b.size() || (i < a.size() && entry_less(a[i], b[j])))
            out.push_back(a[i++]);
        else
            out.push_back(b[j++]);
    }
    return out;
}

struct EliminationMessage {
    std::vector<int> scope;                       // ascending variable ids
    std::vector<std::vector<KBestEntry>> rows;    // size 1 << scope.size()
};

/// k-best bucket elimination: returns the k lowest-energy full assignments
/// under the (energy, lex) order. Energies are accumulated term sums; callers
/// re-evaluate them exactly afterwards.
inline std::vector<KBestEntry> kbest_eliminate(const IsingProblem& problem, const std::vector<int>& order,
                                               std::size_t k, const EnumerationLimits& limits) {
    const int n = problem.n();
    std::vector<int> position(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) position[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = t;

    std::vector<VertexSet> adj(static_cast<std::size_t>(n));
    for (const Coupling& c : problem.couplings()) {
        adj[static_cast<std::size_t>(c.i)].add(c.j);
        adj[static_cast<std::size_t>(c.j)].add(c.i);
    }
    VertexSet active;
    for (int i = 0; i < n; ++i) active.add(i);

    std::vector<EliminationMessage> messages;
    std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(n));
    std::vector<std::vector<KBestEntry>> parked;
    int width_attained = 0;

    for (int t = 0; t < n; ++t) {
        const int v = order[static_cast<std::size_t>(t)];
        std::vector<int> sep;
        adj[static_cast<std::size_t>(v)].intersect(active).for_each([&](int u) { sep.push_back(u); });
        width_attained = std::max(width_attained, static_cast<int>(sep.size()));
        if (sep.size() >= 8 * sizeof(std::size_t) ||
            (std::size_t{1} << sep.size()) > limits.max_table_entries / std::max<std::size_t>(k, 1))
            throw ResourceError("separator table of 2^" + std::to_string(sep.size()) + " rows times k = " +
                                    std::to_string(k) + " exceeds the memory budget (attained width " +
                                    std::to_string(width_attained) + ")",
                                width_attained);
        const std::size_t rows = std::size_t{1} << sep.size();

        std::vector<int> sep_pos(static_cast<std::size_t>(n), -1);
        for (std::size_t p = 0; p < sep.size(); ++p) sep_pos[static_cast<std::size_t>(sep[p])] = static_cast<int>(p);

        // projection maps from (separator row, v bit) to each child's row
        const std::vector<std::size_t>& child_ids = buckets[static_cast<std::size_t>(v)];
        struct ChildProj {
            const EliminationMessage* msg;
            std::vector<int> bit_source;  // separator position, or -1 for v itself
        };
        std::vector<ChildProj> children;
        children.reserve(child_ids.size());
        for (const std::size_t id : child_ids) {
            ChildProj cp{&messages[id], {}};
            for (const int var : messages[id].scope)
                cp.bit_source.push_back(var == v ? -1 : sep_pos[static_cast<std::size_t>(var)]);
            children.push_back(std::move(cp));
        }

        // coupled model neighbors still active (all are in the separator)
        std::vector<std::pair<int, double>> active_nbrs;
        for (const auto& [u, J] : problem.neighbors(v))
            if (active.contains(u) && u != v) active_nbrs.push_back({sep_pos[static_cast<std::size_t>(u)], J});

        EliminationMessage result;
        result.scope = sep;
        result.rows.resize(rows);
        SpinConfig v_bit;
        v_bit.set(v, true);
        for (std::size_t sigma = 0; sigma < rows; ++sigma) {
            std::vector<KBestEntry> merged;
            for (int b = 0; b < 2; ++b) {
                const int zv = b ? -1 : +1;
                double local = problem.h()[static_cast<std::size_t>(v)] * zv;
                for (const auto& [pos, J] : active_nbrs) {
                    const int zu = ((sigma >> pos) & 1u) ? -1 : +1;
                    local += J * zv * zu;
                }
                std::vector<KBestEntry> list{{local, b ? v_bit : SpinConfig{}}};
                for (const ChildProj& cp : children) {
                    std::size_t idx = 0;
                    for (std::size_t p = 0; p < cp.bit_source.size(); ++p) {
                        const int src = cp.bit_source[p];
                        const std::size_t bit = src < 0 ? static_cast<std::size_t>(b) : ((sigma >> src) & 1u);
                        idx |= bit << p;
                    }
                    list = kbest_product(list, cp.msg->rows[idx], k);
                }
                merged = b == 0 ? std::move(list) : kbest_union(merged, list, k);
            }
            result.rows[sigma] = std::move(merged);
        }

        // release consumed messages
        for (const std::size_t id : child_ids) messages[id] = EliminationMessage{};

        if (sep.empty()) {
            parked.push_back(std::move(result.rows[0]));
        } else {
            int earliest = sep[0];
            for (const int u : sep)
                if (position[static_cast<std::size_t>(u)] < position[static_cast<std::size_t>(earliest)]) earliest = u;
            buckets[static_cast<std::size_t>(earliest)].push_back(messages.size());
            messages.push_back(std::move(result));
        }

        // fill edges among the separator, then deactivate v
        for (const int u : sep)
            for (const int w : sep)
                if (u != w) adj[static_cast<std::size_t>(u)].add(w);
        active.remove(v);
    }

    std::vector<KBestEntry> final_list{{0.0, SpinConfig{}}};
    for (const std::vector<KBestEntry>& p : parked) final_list = kbest_product(final_list, p, k);
    return final_list;
}

/// Number of states of an n-qubit problem, saturating for large n.
inline std::uint64_t state_space_size(int n) {
    return n < 63 ? (std::uint64_t{1} << n) : std::numeric_limits<std::uint64_t>::max();
}

/// Index one past the topmost complete degenerate level: starting from
/// `target`, extends while consecutive energies are within the tie tolerance.
/// Returns npos when the chain runs off the end of an incomplete list.
inline std::size_t closure_cut(const std::vector<KBestEntry>& entries, std::size_t target, bool complete) {
    std::size_t c = std::min(target, entries.size());
    while (c < entries.size() && entries[c].energy - entries[c - 1].energy <= tie_tolerance) ++c;
    if (c == entries.size() && !complete) return std::numeric_limits<std::size_t>::max();
    return c;
}

inline SubspaceBasis basis_from_entries(const IsingProblem& problem, std::vector<KBestEntry>& entries,
                                        std::size_t cut) {
    std::vector<SpinConfig> states;
    std::vector<double> energies;
    states.reserve(cut);
    energies.reserve(cut);
    for (std::size_t i = 0; i < cut; ++i) {
        states.push_back(entries[i].bits);
        energies.push_back(entries[i].energy);
    }
    return SubspaceBasis(problem.n(), std::move(states), std::move(energies));
}

}  // namespace detail

/// Enumerates the `target_size` lowest-energy classical states by k-best
/// bucket elimination along a min-fill order, then extends minimally so the
/// topmost degenerate level is complete. Cost is exponential in the attained
/// induced width, not in the qubit count.
inline SubspaceBasis enumerate_low_states(const IsingProblem& problem, std::size_t target_size,
                                          const EnumerationLimits& limits = {}) {
    if (target_size < 1) throw ContractViolation("target_size must be >= 1");
    const std::uint64_t total = detail::state_space_size(problem.n());
    target_size = static_cast<std::size_t>(std::min<std::uint64_t>(target_size, total));
    const EliminationOrder order = choose_elimination_order(problem);

    std::uint64_t k_run = std::min<std::uint64_t>(total, target_size + std::max<std::size_t>(64, target_size / 4));
    for (;;) {
        std::vector<detail::KBestEntry> entries =
            detail::kbest_eliminate(problem, order.order, static_cast<std::size_t>(k_run), limits);
        for (detail::KBestEntry& e : entries) e.energy = problem.energy(e.bits);
        std::sort(entries.begin(), entries.end(), detail::entry_less);
        const std::size_t cut = detail::closure_cut(entries, target_size, entries.size() >= total);
        if (cut != std::numeric_limits<std::size_t>::max()) return detail::basis_from_entries(problem, entries, cut);
        k_run = std::min<std::uint64_t>(total, k_run * 2);
    }
}

/// Exhaustive-enumeration oracle with the same contract as
/// enumerate_low_states. Scans all 2^n states in Gray-code order.
inline SubspaceBasis brute_force_low_states(const IsingProblem& problem, std::size_t target_size) {
    const int n = problem.n();
    if (n > 24)
        throw FeasibilityError("brute force enumeration limited to n <= 24, got n = " + std::to_string(n));
    if (target_size < 1) throw ContractViolation("target_size must be >= 1");
    const std::uint64_t total = std::uint64_t{1} << n;
    target_size = static_cast<std::size_t>(std::min<std::uint64_t>(target_size, total));

    std::uint64_t k_run = std::min<std::uint64_t>(total, target_size + std::max<std::size_t>(64, target_size / 4));
    for (;;) {
        auto worst_first = [](const detail::KBestEntry& a, const detail::KBestEntry& b) {
            return detail::entry_less(a, b);
        };
        std::priority_queue<detail::KBestEntry, std::vector<detail::KBestEntry>, decltype(worst_first)> heap(
            worst_first);
        SpinConfig config;
        double e = problem.energy(config);
        for (std::uint64_t i = 0;; ++i) {
            const detail::KBestEntry cur{e, config};
            if (heap.size() < k_run)
                heap.push(cur);
            else if (detail::entry_less(cur, heap.top())) {
                heap.pop();
                heap.push(cur);
            }
            if (i + 1 == total) break;
            const int flip = std::countr_zero(i + 1);
            e += problem.flip_delta(config, flip);
            config.flip(flip);
        }
        std::vector<detail::KBestEntry> entries;
        entries.reserve(heap.size());
        while (!heap.empty()) {
            entries.push_back(heap.top());
            heap.pop();
        }
        for (detail::KBestEntry& entry : entries) entry.energy = problem.energy(entry.bits);
        std::sort(entries.begin(), entries.end(), detail::entry_less);
        const std::size_t cut = detail::closure_cut(entries, target_size, entries.size() >= total);
        if (cut != std::numeric_limits<std::size_t>::max()) return detail::basis_from_entries(problem, entries, cut);
        k_run = std::min<std::uint64_t>(total, k_run * 2);
    }
}

/// Necessary closure condition: no single-bit-flip neighbor of a basis state
/// that lies outside the basis may tie the topmost basis energy.
inline bool closure_holds_on_flip_neighborhood(const IsingProblem& problem, const SubspaceBasis& basis) {
    const double top = basis.energies().back();
    for (const SpinConfig& c : basis.states())
        for (int i = 0; i < problem.n(); ++i) {
            const SpinConfig nb = c.flipped(i);
            if (basis.find(nb) >= 0) continue;
            if (problem.energy(nb) <= top + tie_tolerance) return false;
        }
    return true;
}

/// Audit dump: JSON array of {bits, energy}.
inline void dump_basis_json(const SubspaceBasis& basis, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < basis.size(); ++i)
        arr.push_back({{"bits", basis.state(i).str(basis.n())}, {"energy", basis.energy(i)}});
    out << arr.dump(2) << "\n";
}

}  // namespace effham
