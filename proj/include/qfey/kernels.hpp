#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "spectral.hpp"

namespace qfey {

// ---------------------------------------------------------------------------
// Gaussian heat kernel of the half-Laplacian
// ---------------------------------------------------------------------------

inline double gauss_kernel(double t, double y) {
    detail::require(t > 0.0, "gauss_kernel: t must be positive");
    return std::exp(-y * y / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// Fourier transform of gauss_kernel(t, .) at angular frequency xi.
inline double gauss_symbol(double t, double xi) { return std::exp(-0.5 * t * xi * xi); }

// ---------------------------------------------------------------------------
// Polyharmonic kernel l(t, y) = (1/2pi) int exp(ixy) / (1 + t x^{2N}) dx
// ---------------------------------------------------------------------------

inline constexpr int kMinPolyharmonicOrder = 2;
inline constexpr int kMaxPolyharmonicOrder = 8;

/// Pole data for the residue evaluation of l(t, y).
///
/// The poles of 1/(1 + x^{2N}) in the upper half plane are
/// exp(i(2k-1)pi/(2N)), k = 1..N, and poles k and N+1-k contribute equal
/// real parts. Summing k = 1..floor((N+1)/2) therefore counts every pair
/// once; for odd N the last index is the self-paired pole at x = i, which
/// must enter with half weight.
struct PolyharmonicParams {
    int order = 2;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> weight;
};

inline PolyharmonicParams make_polyharmonic_params(int order) {
    detail::require(order >= kMinPolyharmonicOrder && order <= kMaxPolyharmonicOrder,
                    "polyharmonic order must lie in [2, 8], got " + std::to_string(order));
    PolyharmonicParams p;
    p.order = order;
    const int count = (order + 1) / 2;
    for (int k = 1; k <= count; ++k) {
        const double angle = (2 * k - 1) * std::numbers::pi / (2.0 * order);
        p.alpha.push_back(std::sin(angle));
        p.beta.push_back(std::cos(angle));
        const bool self_paired = (order % 2 == 1) && (2 * k - 1 == order);
        p.weight.push_back(self_paired ? 0.5 : 1.0);
    }
    return p;
}

/// Residue closed form of l(t, y).
inline double polyharmonic_kernel(double t, double y, const PolyharmonicParams& p) {
    detail::require(t > 0.0, "polyharmonic_kernel: t must be positive");
    const double inv_scale = std::pow(t, -1.0 / (2.0 * p.order));
    const double s = inv_scale * std::abs(y);
    double sum = 0.0;
    for (std::size_t k = 0; k < p.alpha.size(); ++k) {
        const double a = p.alpha[k];
        const double b = p.beta[k];
        sum += p.weight[k] * (a * std::cos(b * s) + b * std::sin(b * s)) * std::exp(-a * s);
    }
    return inv_scale * sum / p.order;
}

inline double polyharmonic_symbol(double t, double xi, int order) {
    return 1.0 / (1.0 + t * std::pow(xi * xi, order));
}

namespace detail {

// 15-point Gauss-Kronrod rule with its embedded 7-point Gauss rule.
struct GaussKronrod15 {
    static constexpr std::array<double, 8> xk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& error) {
    using R = GaussKronrod15;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double k = fc * R::wk[7];
    double g = fc * R::wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * R::xk[j];
        const double sum = f(center - dx) + f(center + dx);
        k += R::wk[j] * sum;
        if (j % 2 == 1) g += R::wg[j / 2] * sum;
    }
    kronrod = k * half;
    error = std::abs((k - g) * half);
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double tol, int depth) {
    double value = 0.0;
    double error = 0.0;
    gk15(f, a, b, value, error);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
    if (error <= std::max(tol, floor)) return value;
    if (depth >= 40)
        throw NonConvergence("adaptive quadrature: subdivision limit reached on [" +
                                 std::to_string(a) + ", " + std::to_string(b) + "]",
                             depth);
    const double mid = 0.5 * (a + b);
    return adaptive_gk(f, a, mid, 0.5 * tol, depth + 1) + adaptive_gk(f, mid, b, 0.5 * tol, depth + 1);
}

} // namespace detail

/// Direct quadrature of (1/pi) int_0^inf cos(xy) / (1 + t x^{2N}) dx.
///
/// Independent of the residue form: the range is cut where the tail
/// 1/(t x^{2N}) integrates below 1e-12, and split into half-periods of
/// cos(xy) when |y| > 1.
inline double polyharmonic_kernel_quadrature(double t, double y, int order, double abs_tol = 1e-10) {
    detail::require(t > 0.0, "polyharmonic_kernel_quadrature: t must be positive");
    detail::require(order >= kMinPolyharmonicOrder, "polyharmonic_kernel_quadrature: N must be >= 2");
    const double ay = std::abs(y);
    const int p = 2 * order;
    const double x_max = std::max(1.0, std::pow(1e12 / (t * (p - 1)), 1.0 / (p - 1)));
    auto integrand = [&](double x) { return std::cos(x * ay) / (1.0 + t * std::pow(x, p)); };

    const double natural = std::pow(t, -1.0 / p);
    const double panel = ay > 1.0 ? std::numbers::pi / ay : std::min(1.0, natural);
    const auto panels = static_cast<long>(std::ceil(x_max / panel));
    double total = 0.0;
    for (long j = 0; j < panels; ++j) {
        const double a = j * panel;
        const double b = std::min(x_max, (j + 1) * panel);
        total += detail::adaptive_gk(integrand, a, b, abs_tol * (b - a) / x_max, 0);
    }
    return total / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Kernel rows for circular convolution
// ---------------------------------------------------------------------------

enum class KernelKind { gauss, polyharmonic };

/// How a kernel is put on the grid.
///  - sampled: k[j] = kernel(t, d_j), the closed form read off at the circular offsets.
///  - periodized: the band-limited periodic kernel whose DFT is exactly the
///    continuous symbol on the grid frequencies. Convolution with it is the
///    Fourier multiplier itself, which stays correct when the kernel is
///    narrower than the grid spacing (small t).
enum class KernelRowMode { sampled, periodized };

struct KernelSpec {
    KernelKind kind = KernelKind::gauss;
    int order = 2; // polyharmonic only
};

inline double kernel_value(const KernelSpec& spec, double t, double y) {
    if (spec.kind == KernelKind::gauss) return gauss_kernel(t, y);
    return polyharmonic_kernel(t, y, make_polyharmonic_params(spec.order));
}

inline double kernel_symbol(const KernelSpec& spec, double t, double xi) {
    if (spec.kind == KernelKind::gauss) return gauss_symbol(t, xi);
    return polyharmonic_symbol(t, xi, spec.order);
}

inline RVector kernel_row(const KernelSpec& spec, double t, const Grid& grid,
                          KernelRowMode mode = KernelRowMode::periodized) {
    detail::require(t > 0.0, "kernel_row: t must be positive");
    const int m = grid.size();
    RVector row(m);
    if (mode == KernelRowMode::sampled) {
        if (spec.kind == KernelKind::gauss) {
            for (int j = 0; j < m; ++j) row[j] = gauss_kernel(t, spectral::circular_offset(grid, j));
        } else {
            const PolyharmonicParams p = make_polyharmonic_params(spec.order);
            for (int j = 0; j < m; ++j)
                row[j] = polyharmonic_kernel(t, spectral::circular_offset(grid, j), p);
        }
        return row;
    }
    if (spec.kind == KernelKind::polyharmonic) make_polyharmonic_params(spec.order); // range check
    CVector symbol(m);
    for (int k = 0; k < m; ++k) symbol[k] = kernel_symbol(spec, t, spectral::frequency(grid, k));
    const CVector values = spectral::inverse(symbol);
    for (int j = 0; j < m; ++j) row[j] = values[j].real() / grid.spacing();
    // enforce exact even symmetry; the imaginary parts are rounding noise
    for (int j = 1; j < m / 2; ++j) {
        const double mean = 0.5 * (row[j] + row[m - j]);
        row[j] = mean;
        row[m - j] = mean;
    }
    return row;
}

/// h * sum of a kernel row; 1 when the kernel's mass fits in the box.
inline double kernel_mass(const RVector& row, const Grid& grid) { return grid.spacing() * row.sum(); }

} // namespace qfey
