#pragma once

// Shared fixtures for the unit tests: seeded random operators and states.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "qfey/qfey.hpp"

namespace qfey::testing {

inline std::mt19937_64& rng() {
    static std::mt19937_64 engine(20240611);
    return engine;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline CVector random_vector(int m) {
    CVector v(m);
    for (int j = 0; j < m; ++j) v[j] = {uniform(), uniform()};
    return v;
}

inline CMatrix random_matrix(int m) {
    CMatrix a(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) a(i, j) = {uniform(), uniform()};
    return a;
}

/// Random Hermitian matrix with 2-norm exactly `norm`.
inline CMatrix random_hermitian(int m, double norm) {
    const CMatrix a = random_matrix(m);
    CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    h *= norm / es.eigenvalues().cwiseAbs().maxCoeff();
    return 0.5 * (h + h.adjoint());
}

/// Random matrix scaled to 2-norm `norm`.
inline CMatrix random_with_norm(int m, double norm) {
    const CMatrix a = random_matrix(m);
    Eigen::JacobiSVD<CMatrix> svd(a);
    return a * (norm / svd.singularValues()[0]);
}

inline double max_entry(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

/// Smooth band-limited test state on the default box.
inline WaveFunction smooth_state(const Grid& grid, double sigma = 1.0, double p0 = 0.0) {
    return gaussian_packet(0.0, p0, sigma, grid);
}

} // namespace qfey::testing
