#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "error.hpp"
#include "families.hpp"
#include "grid.hpp"
#include "operators.hpp"
#include "spectral.hpp"

namespace qfey {

// Reference solvers. Everything here is independent of the Chernoff
// machinery: generators come from Fourier multipliers, evolutions from a
// dense Hermitian eigendecomposition or from the closed-form free packet.

enum class HamiltonianKind { half_laplacian_minus_V, neg_polyharmonic_minus_V };

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::half_laplacian_minus_V;
    Potential potential;
    int order = 0; // polyharmonic only
};

inline constexpr int kMaxOracleGridSize = 1024;

/// Dense spectral matrix of (1/2) d^2/dx^2 - V or -(-d^2/dx^2)^N - V.
inline LinearOperatorRep discretize_hamiltonian(const HamiltonianSpec& spec) {
    const Grid& grid = spec.potential.grid();
    const int m = grid.size();
    detail::require(m <= kMaxOracleGridSize, "oracle: grid larger than 1024 points");
    if (spec.kind == HamiltonianKind::neg_polyharmonic_minus_V)
        detail::require(spec.order >= kMinPolyharmonicOrder && spec.order <= kMaxPolyharmonicOrder,
                        "oracle: polyharmonic order must lie in [2, 8]");

    CVector symbol(m);
    for (int k = 0; k < m; ++k) {
        const double xi = spectral::frequency(grid, k);
        symbol[k] = spec.kind == HamiltonianKind::half_laplacian_minus_V ? -0.5 * xi * xi
                                                                          : -std::pow(xi * xi, spec.order);
    }
    // circulant: H_jl = c[(j - l) mod m] with c the inverse DFT of the symbol
    const CVector c = spectral::inverse(symbol);
    CMatrix h(m, m);
    for (int l = 0; l < m; ++l)
        for (int j = 0; j < m; ++j) h(j, l) = c[((j - l) % m + m) % m];
    h.diagonal() -= spec.potential.values().cast<Complex>();
    CMatrix sym = 0.5 * (h + h.adjoint());
    return LinearOperatorRep::dense(std::move(sym));
}

/// Oracle generator matching a family's claimed generator.
inline LinearOperatorRep oracle_generator(const GeneratorDescriptor& generator) {
    if (generator.kind == GeneratorKind::custom || !generator.potential)
        throw InvalidArgument("oracle: family has no analytic generator");
    if (generator.kind == GeneratorKind::half_laplacian_minus_V)
        return discretize_hamiltonian({HamiltonianKind::half_laplacian_minus_V, *generator.potential, 0});
    return discretize_hamiltonian({HamiltonianKind::neg_polyharmonic_minus_V, *generator.potential, generator.order});
}

/// Eigendecomposition H = Q diag(lambda) Q^* of a Hermitian operator,
/// computed once at construction; the query methods are const and re-entrant.
class SpectralOracle {
public:
    explicit SpectralOracle(const LinearOperatorRep& h) : size_(h.size()) {
        detail::require(size_ <= kMaxOracleGridSize, "oracle: operator larger than 1024");
        const CMatrix& a = h.matrix();
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        if (hermiticity_defect(h) > 1e-8 * scale) throw InvalidArgument("oracle: operator is not Hermitian");
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(a);
        if (solver.info() != Eigen::Success) throw NumericalError("oracle: eigendecomposition failed");
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
        residual_ = (a * eigenvectors_ - eigenvectors_ * eigenvalues_.cast<Complex>().asDiagonal())
                        .cwiseAbs()
                        .maxCoeff();
    }

    const RVector& eigenvalues() const noexcept { return eigenvalues_; }
    const CMatrix& eigenvectors() const noexcept { return eigenvectors_; }
    /// max |HQ - Q Lambda|.
    double residual() const noexcept { return residual_; }

    /// e^{iatH} f.
    WaveFunction group(double a, double t, const WaveFunction& f) const {
        const CVector phase = (Complex(0.0, a * t) * eigenvalues_.cast<Complex>()).array().exp().matrix();
        return f.with_values(propagate(phase, f.values()));
    }

    /// e^{tH} f, t >= 0.
    WaveFunction semigroup(double t, const WaveFunction& f) const {
        detail::require(t >= 0.0, "oracle semigroup: t must be >= 0");
        const CVector decay = (t * eigenvalues_).array().exp().cast<Complex>().matrix();
        return f.with_values(propagate(decay, f.values()));
    }

private:
    CVector propagate(const CVector& diag, const CVector& v) const {
        detail::require(v.size() == size_, "oracle: state dimension differs from operator");
        const CVector coeffs = eigenvectors_.adjoint() * v;
        return eigenvectors_ * diag.cwiseProduct(coeffs);
    }

    int size_;
    RVector eigenvalues_;
    CMatrix eigenvectors_;
    double residual_ = 0.0;
};

inline WaveFunction exact_group(const LinearOperatorRep& h, double a, double t, const WaveFunction& f) {
    return SpectralOracle(h).group(a, t, f);
}

inline WaveFunction exact_semigroup(const LinearOperatorRep& h, double t, const WaveFunction& f) {
    return SpectralOracle(h).semigroup(t, f);
}

// ---------------------------------------------------------------------------
// Gaussian wave packets
// ---------------------------------------------------------------------------

namespace detail {

// Probability of |psi|^2 (a Gaussian with this centre and width) lying outside the box.
inline double mass_outside(const Grid& grid, double centre, double std_dev) {
    const double s = std_dev * std::numbers::sqrt2;
    return 0.5 * std::erfc((centre - grid.x_min()) / s) + 0.5 * std::erfc((grid.x_max() - centre) / s);
}

} // namespace detail

/// Free packet psi(t, x) solving psi_t = (ia/2) psi_xx, normalized to unit L2 norm:
///   psi(0, x) = (pi sigma^2)^{-1/4} exp(-(x - x0)^2 / (2 sigma^2) + i p0 (x - x0)).
/// The complex width sigma^2 becomes sigma^2 + iat and the centre moves with velocity a p0.
inline WaveFunction free_packet_evolution(double x0, double p0, double sigma, double a, double t, const Grid& grid) {
    detail::require(sigma > 0.0, "packet: sigma must be positive");
    const Complex width(sigma * sigma, a * t);
    const double centre = x0 + a * p0 * t;
    const double std_dev = std::abs(width) / (std::numbers::sqrt2 * sigma);
    const double leak = std::max(detail::mass_outside(grid, x0, sigma / std::numbers::sqrt2),
                                 detail::mass_outside(grid, centre, std_dev));
    if (leak > 1e-10) throw InvalidArgument("packet: more than 1e-10 of the mass leaves the box");

    const double norm = std::pow(std::numbers::pi * sigma * sigma, -0.25);
    const Complex amplitude = norm * std::sqrt(Complex(sigma * sigma, 0.0) / width);
    const Complex i(0.0, 1.0);
    return sample(
        [&](double x) {
            const double dx = x - centre;
            return amplitude * std::exp(-dx * dx / (2.0 * width) + i * p0 * (x - x0) - i * (0.5 * a * p0 * p0 * t));
        },
        grid);
}

inline WaveFunction gaussian_packet(double x0, double p0, double sigma, const Grid& grid) {
    return free_packet_evolution(x0, p0, sigma, 0.0, 0.0, grid);
}

} // namespace qfey
