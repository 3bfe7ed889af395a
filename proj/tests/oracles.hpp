// Test-only reference implementations, independent of the library's
// computation paths.
#ifndef SPP_TESTS_ORACLES_HPP
#define SPP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "spp/numerics.hpp"
#include "spp/patches.hpp"
#include "spp/pooling.hpp"

namespace oracles {

// Cyclic Jacobi rotation eigensolver for small symmetric matrices.
// Returns eigenvalues sorted non-increasing.
inline std::vector<double> jacobi_eigenvalues(spp::Matrix A, int sweeps = 100) {
    const int n = static_cast<int>(A.rows());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += A(p, q) * A(p, q);
        if (off < 1e-24)
            break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300)
                    continue;
                double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        ev[static_cast<std::size_t>(i)] = A(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
inline spp::Matrix gauss_jordan_inverse(spp::Matrix A) {
    const int n = static_cast<int>(A.rows());
    spp::Matrix inv = spp::Matrix::Identity(n, n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(pivot, col)))
                pivot = r;
        A.row(col).swap(A.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        double d = A(col, col);
        A.row(col) /= d;
        inv.row(col) /= d;
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            double f = A(r, col);
            A.row(r) -= f * A.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

// Normal-equations ridge solution via explicit inversion.
inline spp::Matrix ridge_by_inverse(const spp::Matrix& X, const spp::Matrix& Y, double lambda) {
    const auto D = X.cols();
    spp::Matrix A = X.transpose() * X + lambda * spp::Matrix::Identity(D, D);
    return gauss_jordan_inverse(A) * (X.transpose() * Y);
}

// Brute-force pooling: explicit loops over every (level, cell, coordinate).
inline spp::Vector brute_force_pool(const spp::PatchSet& ps, const spp::PoolingPyramid& pyr,
                                    spp::PoolMode mode) {
    std::vector<double> out;
    for (int c : pyr.levels) {
        for (int cy = 0; cy < c; ++cy) {
            for (int cx = 0; cx < c; ++cx) {
                for (int i = 0; i < ps.q; ++i) {
                    double best = -1e300;
                    double sum = 0.0;
                    int count = 0;
                    for (int a = 0; a < ps.l; ++a) {
                        for (int b = 0; b < ps.l; ++b) {
                            if (a * c / ps.l != cy || b * c / ps.l != cx)
                                continue;
                            double v = ps.data(i, static_cast<Eigen::Index>(a) * ps.l + b);
                            best = std::max(best, v);
                            sum += v;
                            ++count;
                        }
                    }
                    out.push_back(mode == spp::PoolMode::max ? best : sum / count);
                }
            }
        }
    }
    spp::Vector v(static_cast<Eigen::Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = out[i];
    return v;
}

// Random helpers shared by tests.
inline spp::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& g) {
    spp::Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = 2.0 * spp::uniform01(g) - 1.0;
    return m;
}

inline spp::Matrix random_symmetric(Eigen::Index n, std::mt19937_64& g) {
    spp::Matrix m = random_matrix(n, n, g);
    return 0.5 * (m + m.transpose());
}

inline spp::Matrix random_spd(Eigen::Index n, std::mt19937_64& g) {
    spp::Matrix m = random_matrix(n, n, g);
    return m * m.transpose() + spp::Matrix::Identity(n, n);
}

} // namespace oracles

#endif
