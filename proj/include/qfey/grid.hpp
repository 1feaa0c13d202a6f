#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "error.hpp"

namespace qfey {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

/// Uniform periodic grid on [x_min, x_max): x_j = x_min + j*h, j = 0..m-1.
///
/// The interval stands in for the real line. Everything living on the grid
/// (states, kernels, potentials) must decay to negligible size before the
/// box edges; the wrap-around is not corrected for.
class Grid {
public:
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    int size() const noexcept { return m_; }
    double spacing() const noexcept { return h_; }
    double length() const noexcept { return x_max_ - x_min_; }

    double point(int j) const noexcept { return x_min_ + j * h_; }

    bool operator==(const Grid& other) const noexcept {
        return x_min_ == other.x_min_ && x_max_ == other.x_max_ && m_ == other.m_;
    }

    friend Grid make_grid(double x_min, double x_max, int m);

private:
    Grid(double x_min, double x_max, int m)
        : x_min_(x_min), x_max_(x_max), m_(m), h_((x_max - x_min) / m) {}

    double x_min_;
    double x_max_;
    int m_;
    double h_;
};

inline Grid make_grid(double x_min, double x_max, int m) {
    detail::require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
                    "grid: need finite x_min < x_max");
    detail::require(m >= 8, "grid: need at least 8 points, got " + std::to_string(m));
    detail::require(m % 2 == 0, "grid: point count must be even, got " + std::to_string(m));
    return Grid(x_min, x_max, m);
}

namespace detail {
inline void require_same_grid(const Grid& a, const Grid& b) {
    require(a == b, "grid mismatch");
}
} // namespace detail

/// Complex state vector bound to a grid.
class WaveFunction {
public:
    WaveFunction(Grid grid, CVector values) : grid_(std::move(grid)), values_(std::move(values)) {
        detail::require(values_.size() == grid_.size(), "wavefunction length does not match grid");
    }

    static WaveFunction zeros(const Grid& grid) { return {grid, CVector::Zero(grid.size())}; }

    const Grid& grid() const noexcept { return grid_; }
    const CVector& values() const noexcept { return values_; }
    int size() const noexcept { return grid_.size(); }
    Complex operator[](int j) const { return values_[j]; }

    WaveFunction with_values(CVector values) const { return {grid_, std::move(values)}; }

private:
    Grid grid_;
    CVector values_;
};

/// Real bounded potential sampled on a grid.
class Potential {
public:
    Potential(Grid grid, RVector values) : grid_(std::move(grid)), values_(std::move(values)) {
        detail::require(values_.size() == grid_.size(), "potential length does not match grid");
        detail::require(values_.allFinite(), "potential has non-finite samples");
        sup_bound_ = values_.size() > 0 ? values_.cwiseAbs().maxCoeff() : 0.0;
    }

    static Potential zero(const Grid& grid) { return {grid, RVector::Zero(grid.size())}; }

    const Grid& grid() const noexcept { return grid_; }
    const RVector& values() const noexcept { return values_; }
    double sup_bound() const noexcept { return sup_bound_; }

private:
    Grid grid_;
    RVector values_;
    double sup_bound_ = 0.0;
};

inline WaveFunction sample(const std::function<Complex(double)>& fn, const Grid& grid) {
    CVector values(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const Complex v = fn(grid.point(j));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("sample: non-finite value at x = " + std::to_string(grid.point(j)));
        values[j] = v;
    }
    return {grid, std::move(values)};
}

inline Potential sample_potential(const std::function<double(double)>& fn, const Grid& grid) {
    RVector values(grid.size());
    for (int j = 0; j < grid.size(); ++j) values[j] = fn(grid.point(j));
    if (!values.allFinite()) throw NumericalError("sample_potential: non-finite value");
    return {grid, std::move(values)};
}

/// Rectangle-rule L2 product h * sum conj(f_j) g_j.
inline Complex inner_product(const WaveFunction& f, const WaveFunction& g) {
    detail::require_same_grid(f.grid(), g.grid());
    return f.grid().spacing() * f.values().dot(g.values()); // Eigen's dot conjugates the left side
}

inline double l2_norm(const CVector& v, double h) { return std::sqrt(h) * v.norm(); }

inline double l2_norm(const WaveFunction& f) { return l2_norm(f.values(), f.grid().spacing()); }

inline double l2_distance(const WaveFunction& f, const WaveFunction& g) {
    detail::require_same_grid(f.grid(), g.grid());
    return l2_norm(f.values() - g.values(), f.grid().spacing());
}

inline double sup_distance(const WaveFunction& f, const WaveFunction& g) {
    detail::require_same_grid(f.grid(), g.grid());
    return (f.values() - g.values()).cwiseAbs().maxCoeff();
}

} // namespace qfey
