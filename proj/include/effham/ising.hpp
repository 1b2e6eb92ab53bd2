#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "effham/errors.hpp"
#include "effham/spin_config.hpp"

namespace effham {

/// One Ising coupling J_ij between qubits i < j.
struct Coupling {
    int i;
    int j;
    double value;
};

/// An Ising problem Hamiltonian sum_i h_i z_i + sum_{i<j} J_ij z_i z_j with
/// dimensionless fields and couplings. Absent pairs mean J_ij = 0. Instances
/// are immutable after construction and safe to share across threads.
class IsingProblem {
public:
    IsingProblem(int n, std::vector<double> h, std::vector<Coupling> couplings)
        : n_(n), h_(std::move(h)), couplings_(std::move(couplings)) {
        if (n_ < 1) throw ContractViolation("qubit count must be >= 1, got " + std::to_string(n_));
        if (n_ > SpinConfig::max_qubits)
            throw ContractViolation("qubit count " + std::to_string(n_) + " exceeds supported maximum " +
                                    std::to_string(SpinConfig::max_qubits));
        if (static_cast<int>(h_.size()) != n_)
            throw ContractViolation("field vector has " + std::to_string(h_.size()) + " entries for n = " +
                                    std::to_string(n_));
        std::sort(couplings_.begin(), couplings_.end(),
                  [](const Coupling& a, const Coupling& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
        for (std::size_t e = 0; e < couplings_.size(); ++e) {
            const Coupling& c = couplings_[e];
            if (c.i < 0 || c.i >= c.j || c.j >= n_)
                throw ContractViolation("coupling pair (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                                        ") violates 0 <= i < j < n");
            if (e > 0 && couplings_[e - 1].i == c.i && couplings_[e - 1].j == c.j)
                throw ContractViolation("duplicate coupling pair (" + std::to_string(c.i) + "," +
                                        std::to_string(c.j) + ")");
        }
        neighbors_.resize(static_cast<std::size_t>(n_));
        for (const Coupling& c : couplings_) {
            neighbors_[static_cast<std::size_t>(c.i)].push_back({c.j, c.value});
            neighbors_[static_cast<std::size_t>(c.j)].push_back({c.i, c.value});
        }
    }

    int n() const { return n_; }
    const std::vector<double>& h() const { return h_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }

    /// Coupled partners of qubit i as (j, J_ij) pairs.
    const std::vector<std::pair<int, double>>& neighbors(int i) const {
        return neighbors_[static_cast<std::size_t>(i)];
    }

    double coupling(int i, int j) const {
        for (const auto& [k, v] : neighbors_[static_cast<std::size_t>(i)])
            if (k == j) return v;
        return 0.0;
    }

    /// Classical energy of a configuration, without the length check. The
    /// physical unperturbed energy is (E(s)/2) times this value.
    double energy(const SpinConfig& c) const {
        double e = 0.0;
        for (int i = 0; i < n_; ++i) e += h_[static_cast<std::size_t>(i)] * c.spin(i);
        for (const Coupling& cp : couplings_) e += cp.value * c.spin(cp.i) * c.spin(cp.j);
        return e;
    }

    /// Energy change from flipping qubit i of configuration c.
    double flip_delta(const SpinConfig& c, int i) const {
        double local = h_[static_cast<std::size_t>(i)];
        for (const auto& [j, v] : neighbors_[static_cast<std::size_t>(i)]) local += v * c.spin(j);
        return -2.0 * c.spin(i) * local;
    }

private:
    int n_;
    std::vector<double> h_;
    std::vector<Coupling> couplings_;
    std::vector<std::vector<std::pair<int, double>>> neighbors_;
};

/// Classical energy sum_i h_i z_i + sum_{i<j} J_ij z_i z_j of a spin state.
inline double classical_energy(const IsingProblem& problem, const SpinState& state) {
    if (state.n != problem.n())
        throw ContractViolation("state has " + std::to_string(state.n) + " bits for a " +
                                std::to_string(problem.n()) + "-qubit problem");
    return problem.energy(state.config);
}

enum class EdgeKind { strong, random };

struct TopologyEdge {
    int i;
    int j;
    EdgeKind kind;
};

struct Topology {
    int n = 0;
    std::vector<TopologyEdge> edges;
};

/// R x C grid with nearest-neighbor edges; each edge is tagged strong with
/// probability p_strong using the given generator (deterministic per seed).
inline Topology grid_topology(int rows, int cols, double p_strong, std::mt19937_64& rng) {
    Topology t;
    t.n = rows * cols;
    auto id = [cols](int r, int c) { return r * cols + c; };
    auto kind = [&]() {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return u < p_strong ? EdgeKind::strong : EdgeKind::random;
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) t.edges.push_back({id(r, c), id(r, c + 1), kind()});
            if (r + 1 < rows) t.edges.push_back({id(r, c), id(r + 1, c), kind()});
        }
    return t;
}

/// Draws a random instance on the given topology: h_i uniform from {-1/3, +1/3},
/// strong edges J = -1, random edges uniform from {-1/3, +1/3}. Deterministic
/// for a fixed (n, topology, seed); h values are drawn first in qubit order,
/// then edge values in the order the edges are listed.
inline IsingProblem generate_instance(int n, const std::vector<TopologyEdge>& topology, std::uint64_t seed) {
    for (const TopologyEdge& e : topology)
        if (e.i < 0 || e.i >= e.j || e.j >= n)
            throw ContractViolation("topology edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                    ") invalid for n = " + std::to_string(n));
    std::mt19937_64 rng(seed);
    auto coin_third = [&rng]() { return (rng() & 1u) ? (1.0 / 3.0) : (-1.0 / 3.0); };
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] = coin_third();
    std::vector<Coupling> couplings;
    couplings.reserve(topology.size());
    for (const TopologyEdge& e : topology)
        couplings.push_back({e.i, e.j, e.kind == EdgeKind::strong ? -1.0 : coin_third()});
    return IsingProblem(n, std::move(h), std::move(couplings));
}

// ---- JSON formats -----------------------------------------------------------
//
// Problem file: {"n": 4, "h": [...], "couplings": [[i, j, J], ...]}
// Topology file: {"n": 4, "edges": [[i, j, "strong"|"random"], ...]}

inline nlohmann::json problem_to_json(const IsingProblem& p) {
    nlohmann::json j;
    j["n"] = p.n();
    j["h"] = p.h();
    auto arr = nlohmann::json::array();
    for (const Coupling& c : p.couplings()) arr.push_back({c.i, c.j, c.value});
    j["couplings"] = std::move(arr);
    return j;
}

inline IsingProblem problem_from_json(const nlohmann::json& j) {
    try {
        const int n = j.at("n").get<int>();
        auto h = j.at("h").get<std::vector<double>>();
        std::vector<Coupling> couplings;
        for (const auto& e : j.at("couplings")) {
            if (!e.is_array() || e.size() != 3) throw ParseError("coupling entries must be [i, j, J] triples");
            couplings.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
        }
        return IsingProblem(n, std::move(h), std::move(couplings));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed problem JSON: ") + e.what());
    }
}

inline IsingProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("cannot parse " + path + ": " + e.what());
    }
    return problem_from_json(j);
}

inline void save_problem(const std::string& path, const IsingProblem& p) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << problem_to_json(p).dump(2) << "\n";
}

inline Topology topology_from_json(const nlohmann::json& j) {
    try {
        Topology t;
        t.n = j.at("n").get<int>();
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw ParseError("topology entries must be [i, j, kind] triples");
            const std::string kind = e[2].get<std::string>();
            if (kind != "strong" && kind != "random")
                throw ParseError("edge kind must be \"strong\" or \"random\", got \"" + kind + "\"");
            t.edges.push_back({e[0].get<int>(), e[1].get<int>(),
                               kind == "strong" ? EdgeKind::strong : EdgeKind::random});
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed topology JSON: ") + e.what());
    }
}

inline Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open topology file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("cannot parse " + path + ": " + e.what());
    }
    return topology_from_json(j);
}

}  // namespace effham
