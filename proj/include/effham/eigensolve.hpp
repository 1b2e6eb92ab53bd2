#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "effham/errors.hpp"
#include "effham/matrix.hpp"

#ifdef EFFHAM_HAVE_LAPACK
#include <lapacke.h>
#endif

namespace effham {

/// Full symmetric eigendecomposition: ascending eigenvalues and matching
/// orthonormal eigenvector columns, sign-fixed so each vector's
/// largest-magnitude component is positive.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

enum class EigenBackend {
    automatic,  // builtin below 512, LAPACK above when available
    builtin,
    lapack,
};

namespace detail {

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// accumulating the orthogonal transformation in z.
inline void householder_tridiag(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = z.rows();
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::abs(z(i, k));
            if (scale == 0.0) {
                e[i] = z(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    z(i, k) /= scale;
                    h += z(i, k) * z(i, k);
                }
                double f = z(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                z(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    z(j, i) = z(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
                    e[j] = g / h;
                    f += e[j] * z(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = z(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
                }
            }
        } else {
            e[i] = z(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
                for (std::size_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
            }
        }
        d[i] = z(i, i);
        z(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) z(j, i) = z(i, j) = 0.0;
    }
}

/// QL with implicit shifts on a tridiagonal (d, e), rotating the columns of z.
/// e[0..n-2] holds subdiagonals on entry.
inline void tridiag_ql(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw ConvergenceError("QL iteration failed to converge for eigenvalue " + std::to_string(l),
                                           std::abs(e[l]));
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i1 = m; i1 > l; --i1) {
                    const std::size_t i = i1 - 1;
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

inline void sort_and_fix_signs(std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = values.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> sorted_values(n);
    Matrix sorted_vectors(vectors.rows(), n);
    for (std::size_t c = 0; c < n; ++c) {
        sorted_values[c] = values[perm[c]];
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, perm[c]));
            if (a > best) {
                best = a;
                arg = r;
            }
        }
        const double sign = vectors(arg, perm[c]) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < vectors.rows(); ++r) sorted_vectors(r, c) = sign * vectors(r, perm[c]);
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

inline EigenDecomposition diagonalize_builtin(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix z = a;
    std::vector<double> d(n, 0.0), e(n, 0.0);
    if (n == 1) {
        d[0] = a(0, 0);
        z(0, 0) = 1.0;
    } else {
        householder_tridiag(z, d, e);
        // shift subdiagonals down one slot for the QL routine
        for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
        tridiag_ql(d, e, z);
    }
    sort_and_fix_signs(d, z);
    return {std::move(d), std::move(z)};
}

#ifdef EFFHAM_HAVE_LAPACK
inline EigenDecomposition diagonalize_lapack(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix z = a;
    std::vector<double> w(n, 0.0);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'L', static_cast<lapack_int>(n), z.data(),
                                           static_cast<lapack_int>(n), w.data());
    if (info != 0)
        throw ConvergenceError("dsyevd failed with info = " + std::to_string(info), 0.0);
    // dsyevd returns eigenvectors in rows-as-stored columns of the row-major
    // array; entry (i, j) is component i of eigenvector j already.
    sort_and_fix_signs(w, z);
    return {std::move(w), std::move(z)};
}
#endif

}  // namespace detail

/// Relative asymmetry allowed in the input matrix.
inline constexpr double symmetry_tolerance = 1e-12;

/// Dense symmetric eigendecomposition. Builtin path is Householder
/// tridiagonalization followed by implicit-shift QL; large matrices use
/// LAPACK dsyevd when compiled in. Both satisfy the same contracts and the
/// result is deterministic up to the fixed sign convention.
inline EigenDecomposition diagonalize_symmetric(const Matrix& a, EigenBackend backend = EigenBackend::automatic) {
    if (a.rows() == 0 || a.rows() != a.cols()) throw ContractViolation("matrix must be square and nonempty");
    if (!a.all_finite()) throw ContractViolation("matrix has non-finite entries");
    const double scale = a.max_abs();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > symmetry_tolerance * std::max(scale, 1.0))
                throw ContractViolation("matrix asymmetry at (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") exceeds tolerance");
#ifdef EFFHAM_HAVE_LAPACK
    if (backend == EigenBackend::lapack || (backend == EigenBackend::automatic && a.rows() >= 512))
        return detail::diagonalize_lapack(a);
#else
    if (backend == EigenBackend::lapack)
        throw ContractViolation("LAPACK backend not compiled in");
#endif
    return detail::diagonalize_builtin(a);
}

}  // namespace effham
