#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "effham/errors.hpp"
#include "effham/ising.hpp"
#include "effham/matrix.hpp"
#include "effham/schedule.hpp"
#include "effham/spin_config.hpp"
#include "effham/subspace.hpp"

namespace effham {

/// Expansion depth per matrix-element class. Diagonal elements carry the
/// even orders up to `diag`; off-diagonal elements carry order 1 and, with
/// `offdiag` = 2, the two-flip second-order sums.
struct HamiltonianOrders {
    int diag = 4;     // 2 or 4
    int offdiag = 2;  // 1 or 2
};

/// Denominators |E_k - E_n| below this are treated as resonances and raise
/// an error instead of being regularized: a surviving small denominator
/// means the subspace is under-sized for the requested level.
inline constexpr double singularity_tolerance = 1e-8;

/// The N_S x N_S effective Hamiltonian for one target level at one schedule
/// point. Exactly symmetric by construction; off-diagonal entries are nonzero
/// only between basis states at Hamming distance 1 or 2.
struct EffectiveHamiltonian {
    Matrix matrix;
    int k_index = 0;
    double s = 0.0;
    HamiltonianOrders orders;
};

/// Per-level expansion-parameter bound, reported alongside results as a
/// trust indicator.
struct SmallParameterEstimate {
    double lambda = 0.0;
    double e_min_outside = 0.0;  // lowest unperturbed energy among reachable outside states
    bool trusted = true;         // false when the bound is invalid for this level
};

/// Precomputed flip geometry of a basis: which single and double bit flips
/// of each basis state stay inside the subspace, and the classical energies
/// of the states they reach. Shared read-only across all (k, s) builds for
/// one (problem, basis) pair; building it is the only part that touches the
/// hash index.
class PerturbationContext {
public:
    PerturbationContext(const IsingProblem& problem, const SubspaceBasis& basis)
        : problem_(&problem), basis_(&basis), n_(problem.n()) {
        if (basis.n() != problem.n())
            throw ContractViolation("basis qubit count does not match the problem");
        const std::size_t ns = basis.size();
        const std::size_t un = static_cast<std::size_t>(n_);
        flip_index_.resize(ns * un);
        flip_energy_.resize(ns * un);
        pair_offsets_.assign(ns + 1, 0);

        j_dense_.assign(un * un, 0.0);
        for (const Coupling& c : problem.couplings())
            j_dense_[static_cast<std::size_t>(c.i) * un + static_cast<std::size_t>(c.j)] =
                j_dense_[static_cast<std::size_t>(c.j) * un + static_cast<std::size_t>(c.i)] = c.value;

        min_outside_ecl_ = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < ns; ++a) {
            const SpinConfig& state = basis.state(a);
            const double e_a = basis.energy(a);
            for (int i = 0; i < n_; ++i) {
                const SpinConfig nb = state.flipped(i);
                const double e_nb = e_a + problem.flip_delta(state, i);
                flip_energy_[a * un + static_cast<std::size_t>(i)] = e_nb;
                const int idx = basis.find(nb);
                flip_index_[a * un + static_cast<std::size_t>(i)] = idx;
                if (idx < 0) min_outside_ecl_ = std::min(min_outside_ecl_, e_nb);
            }
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j) {
                    const double e_m = double_flip_energy(a, i, j);
                    const SpinConfig mid = state.flipped(i).flipped(j);
                    const int idx = basis.find(mid);
                    if (idx >= 0)
                        pair_links_.push_back({idx, static_cast<std::int16_t>(i), static_cast<std::int16_t>(j)});
                    else
                        min_outside_ecl_ = std::min(min_outside_ecl_, e_m);
                }
            pair_offsets_[a + 1] = pair_links_.size();
        }
    }

    const SubspaceBasis& basis() const { return *basis_; }

    /// True when every state reachable by one or two flips lies inside the
    /// basis; the effective Hamiltonian is then exact.
    bool complement_unreachable() const { return !std::isfinite(min_outside_ecl_); }

    /// Lowest classical energy among states outside the basis reachable by
    /// at most two flips (+inf when there are none).
    double min_outside_classical_energy() const { return min_outside_ecl_; }

    EffectiveHamiltonian build(int k_index, double s, const Schedule& schedule,
                               HamiltonianOrders orders = {}) const {
        validate_orders(orders);
        const std::size_t ns = basis_->size();
        if (k_index < 0 || static_cast<std::size_t>(k_index) >= ns)
            throw ContractViolation("k_index " + std::to_string(k_index) + " out of range for basis of size " +
                                    std::to_string(ns));
        const ScheduleValue sv = schedule.at(s);
        const double v = 0.5 * sv.delta;
        const double h0 = 0.5 * sv.eps;
        const std::size_t un = static_cast<std::size_t>(n_);

        EffectiveHamiltonian result{Matrix(ns, ns), k_index, s, orders};
        Matrix& hm = result.matrix;
        for (std::size_t a = 0; a < ns; ++a) hm(a, a) = h0 * basis_->energy(a);
        if (v == 0.0) return result;  // no perturbation: diagonal and exact

        const double e_k = basis_->energy(static_cast<std::size_t>(k_index));
        // E_kn = h0 * (e_k - e_n), checked against the singularity tolerance
        auto denom = [&](std::size_t a, int flip_i, int flip_j, double e_n) {
            const double d = h0 * (e_k - e_n);
            if (std::abs(d) < singularity_tolerance) {
                SpinConfig offender = basis_->state(a).flipped(flip_i);
                if (flip_j >= 0) offender.flip(flip_j);
                throw SingularDenominatorError(
                    "singular denominator for level k = " + std::to_string(k_index) + " via outside state " +
                        offender.str(n_) + ": E_k = " + std::to_string(h0 * e_k) + ", E_n = " +
                        std::to_string(h0 * e_n),
                    k_index, offender.str(n_), h0 * e_k, h0 * e_n);
            }
            return d;
        };

        const double v2 = v * v;
        // order 1: single-flip pairs inside the basis
        for (std::size_t a = 0; a < ns; ++a)
            for (int i = 0; i < n_; ++i) {
                const int b = flip_index_[a * un + static_cast<std::size_t>(i)];
                if (b > static_cast<int>(a)) hm(a, static_cast<std::size_t>(b)) = -v;
            }

        // order 2, diagonal
        if (orders.diag >= 2)
            for (std::size_t a = 0; a < ns; ++a) {
                double sum2 = 0.0;
                for (int i = 0; i < n_; ++i)
                    if (flip_index_[a * un + static_cast<std::size_t>(i)] < 0)
                        sum2 += v2 / denom(a, i, -1, flip_energy_[a * un + static_cast<std::size_t>(i)]);
                hm(a, a) += sum2;
            }

        // order 2, off-diagonal: two-flip partners via outside intermediates
        if (orders.offdiag >= 2)
            for (std::size_t a = 0; a < ns; ++a)
                for (std::size_t p = pair_offsets_[a]; p < pair_offsets_[a + 1]; ++p) {
                    const PairLink& link = pair_links_[p];
                    if (link.beta <= static_cast<int>(a)) continue;
                    double sum = 0.0;
                    for (const int i : {static_cast<int>(link.i), static_cast<int>(link.j)})
                        if (flip_index_[a * un + static_cast<std::size_t>(i)] < 0)
                            sum += v2 / denom(a, i, -1, flip_energy_[a * un + static_cast<std::size_t>(i)]);
                    hm(a, static_cast<std::size_t>(link.beta)) += sum;
                }

        // order 4, diagonal
        if (orders.diag >= 4) {
            // E_k^(2): second-order energy of the target level itself
            double e_k2 = 0.0;
            {
                const std::size_t a = static_cast<std::size_t>(k_index);
                for (int i = 0; i < n_; ++i)
                    if (flip_index_[a * un + static_cast<std::size_t>(i)] < 0)
                        e_k2 += v2 / denom(a, i, -1, flip_energy_[a * un + static_cast<std::size_t>(i)]);
            }
            const double v4 = v2 * v2;
            for (std::size_t a = 0; a < ns; ++a) {
                double counter = 0.0;
                std::vector<double> inv_denom(un, 0.0);  // 0 for in-basis neighbors
                for (int i = 0; i < n_; ++i)
                    if (flip_index_[a * un + static_cast<std::size_t>(i)] < 0) {
                        const double d = denom(a, i, -1, flip_energy_[a * un + static_cast<std::size_t>(i)]);
                        inv_denom[static_cast<std::size_t>(i)] = 1.0 / d;
                        counter += v2 / (d * d);
                    }
                double paths = 0.0;
                std::size_t link_cursor = pair_offsets_[a];
                for (int i = 0; i < n_; ++i)
                    for (int j = i + 1; j < n_; ++j) {
                        const bool mid_inside =
                            link_cursor < pair_offsets_[a + 1] && pair_links_[link_cursor].i == i &&
                            pair_links_[link_cursor].j == j;
                        if (mid_inside) {
                            ++link_cursor;
                            continue;
                        }
                        const double amp = inv_denom[static_cast<std::size_t>(i)] +
                                           inv_denom[static_cast<std::size_t>(j)];
                        if (amp == 0.0) continue;
                        const double e_m = double_flip_energy(a, i, j);
                        paths += v4 * amp * amp / denom(a, i, j, e_m);
                    }
                hm(a, a) += paths - e_k2 * counter;
            }
        }

        for (std::size_t a = 0; a < ns; ++a)
            for (std::size_t b = a + 1; b < ns; ++b) hm(b, a) = hm(a, b);
        return result;
    }

    /// The second-order diagonal contributions alone (one per basis state).
    std::vector<double> second_order_diagonal(int k_index, double s, const Schedule& schedule) const {
        const EffectiveHamiltonian bare = build(k_index, s, schedule, {2, 1});
        const ScheduleValue sv = schedule.at(s);
        std::vector<double> out(basis_->size());
        for (std::size_t a = 0; a < basis_->size(); ++a)
            out[a] = bare.matrix(a, a) - 0.5 * sv.eps * basis_->energy(a);
        return out;
    }

    SmallParameterEstimate small_parameter(int k_index, double s, const Schedule& schedule) const {
        const std::size_t ns = basis_->size();
        if (k_index < 0 || static_cast<std::size_t>(k_index) >= ns)
            throw ContractViolation("k_index " + std::to_string(k_index) + " out of range for basis of size " +
                                    std::to_string(ns));
        const ScheduleValue sv = schedule.at(s);
        const double v = 0.5 * sv.delta;
        const double h0 = 0.5 * sv.eps;
        if (complement_unreachable())
            return {0.0, std::numeric_limits<double>::infinity(), true};  // exact regime
        if (v == 0.0) return {0.0, h0 * min_outside_ecl_, true};
        const double e_min = h0 * min_outside_ecl_;
        const double e_k = h0 * basis_->energy(static_cast<std::size_t>(k_index));
        if (e_min - e_k <= 0.0) return {std::numeric_limits<double>::infinity(), e_min, false};
        return {v / (e_min - e_k), e_min, true};
    }

private:
    struct PairLink {
        int beta;  // basis index of the two-flip partner
        std::int16_t i, j;
    };

    static void validate_orders(HamiltonianOrders orders) {
        if (orders.diag != 2 && orders.diag != 4)
            throw ContractViolation("diagonal order must be 2 or 4, got " + std::to_string(orders.diag));
        if (orders.offdiag != 1 && orders.offdiag != 2)
            throw ContractViolation("off-diagonal order must be 1 or 2, got " + std::to_string(orders.offdiag));
    }

    /// Classical energy of basis state a with bits i and j flipped, via the
    /// stored single-flip energies plus the cross term.
    double double_flip_energy(std::size_t a, int i, int j) const {
        const std::size_t un = static_cast<std::size_t>(n_);
        const SpinConfig& state = basis_->state(a);
        const double e_a = basis_->energy(a);
        const double di = flip_energy_[a * un + static_cast<std::size_t>(i)] - e_a;
        const double dj = flip_energy_[a * un + static_cast<std::size_t>(j)] - e_a;
        const double cross =
            4.0 * state.spin(i) * state.spin(j) * j_dense_[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)];
        return e_a + di + dj + cross;
    }

    const IsingProblem* problem_;
    const SubspaceBasis* basis_;
    int n_;
    std::vector<int> flip_index_;       // [a*n + i] basis index of a^i, or -1
    std::vector<double> flip_energy_;   // [a*n + i] classical energy of a^i
    std::vector<PairLink> pair_links_;  // per a, ascending (i, j)
    std::vector<std::size_t> pair_offsets_;
    std::vector<double> j_dense_;
    double min_outside_ecl_;
};

inline EffectiveHamiltonian build_effective_hamiltonian(const IsingProblem& problem, const SubspaceBasis& basis,
                                                        int k_index, double s, const Schedule& schedule,
                                                        HamiltonianOrders orders = {}) {
    return PerturbationContext(problem, basis).build(k_index, s, schedule, orders);
}

inline SmallParameterEstimate estimate_small_parameter(const IsingProblem& problem, const SubspaceBasis& basis,
                                                       int k_index, double s, const Schedule& schedule) {
    return PerturbationContext(problem, basis).small_parameter(k_index, s, schedule);
}

}  // namespace effham
