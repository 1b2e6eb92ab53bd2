#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "effham/eigensolve.hpp"
#include "effham/errors.hpp"
#include "effham/ising.hpp"
#include "effham/matrix.hpp"
#include "effham/schedule.hpp"

namespace effham {

/// Lowest eigenvalues of the full 2^n-dimensional H(s).
struct ExactSpectrum {
    double s = 0.0;
    int n = 0;
    std::vector<double> eigenvalues;  // ascending, length m
};

namespace detail {

/// Matrix-free application of H(s) = -(Delta/2) sum_i sigma^x_i + (E/2) H_P
/// on the 2^n computational basis. The diagonal part is precomputed; each
/// sigma^x_i contributes one single-bit-flip off-diagonal term.
class TransverseIsingApply {
public:
    TransverseIsingApply(const IsingProblem& problem, double delta, double eps)
        : n_(problem.n()), dim_(std::size_t{1} << problem.n()), half_delta_(0.5 * delta) {
        diag_.resize(dim_);
        diag_[0] = 0.5 * eps * problem.energy(SpinConfig{});
        // diag[s] from diag[s with lowest bit cleared]: one spin flip
        for (std::size_t s = 1; s < dim_; ++s) {
            const int b = std::countr_zero(s);
            const std::size_t prev = s & (s - 1);
            double local = problem.h()[static_cast<std::size_t>(b)];
            for (const auto& [j, J] : problem.neighbors(b))
                local += J * (((prev >> j) & 1u) ? -1.0 : 1.0);
            // flipping bit b of prev from z=+1 to z=-1 changes H_P by -2*local
            diag_[s] = diag_[prev] - 0.5 * eps * 2.0 * local;
        }
    }

    std::size_t dim() const { return dim_; }

    /// Gershgorin-style bound on the spectral norm.
    double norm_bound() const {
        double m = 0.0;
        for (const double d : diag_) m = std::max(m, std::abs(d));
        return m + n_ * half_delta_;
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        for (std::size_t s = 0; s < dim_; ++s) y[s] = diag_[s] * x[s];
        if (half_delta_ == 0.0) return;
        for (int i = 0; i < n_; ++i) {
            const std::size_t mask = std::size_t{1} << i;
            for (std::size_t s = 0; s < dim_; ++s) y[s] -= half_delta_ * x[s ^ mask];
        }
    }

    const std::vector<double>& diagonal() const { return diag_; }

private:
    int n_;
    std::size_t dim_;
    double half_delta_;
    std::vector<double> diag_;
};

inline void orthogonalize_against(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const std::vector<double>& u : basis) {
            const double c = dot(u, w);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
        }
}

inline Matrix tridiagonal_matrix(const std::vector<double>& alphas, const std::vector<double>& betas) {
    const std::size_t j = alphas.size();
    Matrix t(j, j);
    for (std::size_t i = 0; i < j; ++i) {
        t(i, i) = alphas[i];
        if (i + 1 < j) t(i, i + 1) = t(i + 1, i) = betas[i];
    }
    return t;
}

}  // namespace detail

/// Lowest m exact eigenvalues of H(s) via Lanczos iteration with full
/// reorthogonalization and a seeded random start vector; up to m+8 Ritz
/// pairs are retained in the convergence test. On Krylov breakdown (an
/// invariant subspace was reached) the converged Ritz vectors are deflated
/// and the iteration restarts in the orthogonal complement, which is what
/// resolves degenerate multiplicities.
inline ExactSpectrum exact_spectrum(const IsingProblem& problem, double s, const Schedule& schedule, int m,
                                    std::uint64_t seed = 0x5eed) {
    if (problem.n() > 20)
        throw FeasibilityError("exact diagonalization limited to n <= 20, got n = " +
                               std::to_string(problem.n()));
    if (m < 1) throw ContractViolation("level count must be >= 1");
    const ScheduleValue sv = schedule.at(s);
    const detail::TransverseIsingApply op(problem, sv.delta, sv.eps);
    const std::size_t dim = op.dim();
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(m), dim);
    const std::size_t retain = std::min<std::size_t>(want + 8, dim);

    const double norm_bound = std::max(op.norm_bound(), 1e-300);
    const double res_tol = 1e-10 * norm_bound;
    const double breakdown_tol = 1e-13 * norm_bound;
    const double tie_margin = 1e-9 * norm_bound;

    const std::size_t max_vectors =
        std::min(dim, std::max<std::size_t>(4 * retain + 16, std::size_t{200'000'000} / (8 * dim)));
    const std::size_t block_cap = std::min<std::size_t>(dim, 300);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> locked;  // converged, deflated Ritz vectors
    std::vector<double> locked_values;
    double best_unconverged_residual = norm_bound;
    int stagnant_blocks = 0;

    auto kth_locked_value = [&](std::size_t k) {
        std::vector<double> vals = locked_values;
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k), vals.end());
        return vals[k];
    };

    while (locked.size() < dim) {
        // fresh start vector in the orthogonal complement of everything found
        std::vector<double> r(dim);
        for (double& x : r) x = gauss(rng);
        detail::orthogonalize_against(r, locked);
        const double rn = norm2(r);
        if (rn < 1e-8) break;  // complement exhausted
        for (double& x : r) x /= rn;

        std::vector<std::vector<double>> block{r};
        std::vector<double> alphas, betas;
        std::vector<double> w(dim);
        double beta = 0.0;
        bool broke_down = false;

        while (block.size() <= block_cap && locked.size() + block.size() <= max_vectors) {
            const std::vector<double>& v = block.back();
            op.apply(v, w);
            if (!betas.empty()) {
                const std::vector<double>& vp = block[block.size() - 2];
                const double b = betas.back();
                for (std::size_t i = 0; i < dim; ++i) w[i] -= b * vp[i];
            }
            const double alpha = dot(v, w);
            for (std::size_t i = 0; i < dim; ++i) w[i] -= alpha * v[i];
            detail::orthogonalize_against(w, locked);
            detail::orthogonalize_against(w, block);
            alphas.push_back(alpha);
            beta = norm2(w);
            if (beta <= breakdown_tol) {
                broke_down = true;
                break;
            }

            const std::size_t j = alphas.size();
            if (j >= 2) {
                const EigenDecomposition td = detail::diagonalize_builtin(detail::tridiagonal_matrix(alphas, betas));
                const std::size_t check = std::min<std::size_t>(j, retain);
                bool all_done = true;
                for (std::size_t i = 0; i < check; ++i) {
                    const double res = std::abs(beta * td.eigenvectors(j - 1, i));
                    if (res > res_tol) {
                        all_done = false;
                        best_unconverged_residual = std::min(best_unconverged_residual, res);
                        break;
                    }
                }
                if (all_done && j >= std::min<std::size_t>(retain, dim - locked.size())) break;
            }
            betas.push_back(beta);
            for (double& x : w) x /= beta;
            block.push_back(w);
        }

        // extract converged Ritz pairs from the block
        const std::size_t j = alphas.size();
        std::size_t added = 0;
        double block_min = std::numeric_limits<double>::infinity();
        if (j > 0) {
            const EigenDecomposition td = detail::diagonalize_builtin(detail::tridiagonal_matrix(alphas, betas));
            const double beta_last = broke_down ? 0.0 : beta;
            for (std::size_t i = 0; i < j; ++i) {
                const double res = std::abs(beta_last * td.eigenvectors(j - 1, i));
                if (res > res_tol) {
                    best_unconverged_residual = std::min(best_unconverged_residual, res);
                    continue;
                }
                std::vector<double> y(dim, 0.0);
                for (std::size_t q = 0; q < j; ++q) {
                    const double c = td.eigenvectors(q, i);
                    const std::vector<double>& vq = block[q];
                    for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += c * vq[idx];
                }
                const double yn = norm2(y);
                if (yn < 0.5) continue;  // lost to cancellation; a restart recovers the direction
                for (double& x : y) x /= yn;
                locked.push_back(std::move(y));
                locked_values.push_back(td.eigenvalues[i]);
                block_min = std::min(block_min, td.eigenvalues[i]);
                ++added;
            }
        }
        stagnant_blocks = added == 0 ? stagnant_blocks + 1 : 0;
        if (stagnant_blocks >= 3)
            throw ConvergenceError("Lanczos made no progress over three restarts; best residual " +
                                       std::to_string(best_unconverged_residual),
                                   best_unconverged_residual);

        if (locked.size() >= want && added > 0 && block_min > kth_locked_value(want - 1) + tie_margin)
            break;  // complement spectrum is strictly above the wanted levels
    }

    if (locked.size() < want)
        throw ConvergenceError("Lanczos converged only " + std::to_string(locked.size()) + " of " +
                                   std::to_string(want) + " levels; best residual " +
                                   std::to_string(best_unconverged_residual),
                               best_unconverged_residual);

    std::vector<double> values = locked_values;
    std::sort(values.begin(), values.end());
    values.resize(want);
    return {s, problem.n(), std::move(values)};
}

/// Dense full diagonalization of H(s) for n <= 12; agrees with the iterative
/// path to high accuracy and serves as its cross-check.
inline ExactSpectrum exact_spectrum_dense(const IsingProblem& problem, double s, const Schedule& schedule, int m) {
    if (problem.n() > 12)
        throw FeasibilityError("dense exact diagonalization limited to n <= 12, got n = " +
                               std::to_string(problem.n()));
    if (m < 1) throw ContractViolation("level count must be >= 1");
    const ScheduleValue sv = schedule.at(s);
    const detail::TransverseIsingApply op(problem, sv.delta, sv.eps);
    const std::size_t dim = op.dim();
    Matrix hm(dim, dim);
    for (std::size_t st = 0; st < dim; ++st) {
        hm(st, st) = op.diagonal()[st];
        for (int i = 0; i < problem.n(); ++i) hm(st, st ^ (std::size_t{1} << i)) = -0.5 * sv.delta;
    }
    EigenDecomposition d = diagonalize_symmetric(hm);
    d.eigenvalues.resize(std::min<std::size_t>(static_cast<std::size_t>(m), dim));
    return {s, problem.n(), std::move(d.eigenvalues)};
}

}  // namespace effham
