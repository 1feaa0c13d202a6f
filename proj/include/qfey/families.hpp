#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "operators.hpp"

namespace qfey {

enum class GeneratorKind { half_laplacian_minus_V, neg_polyharmonic_minus_V, custom };

/// What the family is claimed to be Chernoff-tangent to.
struct GeneratorDescriptor {
    GeneratorKind kind = GeneratorKind::custom;
    std::optional<Potential> potential;
    int order = 0; // polyharmonic only
};

/// t -> S(t), a bounded-operator family meant to be Chernoff-tangent to a generator.
///
/// build(0) is the identity for every family constructed here; build(t) for
/// t < 0 throws.
class TangentFamily {
public:
    using Builder = std::function<LinearOperatorRep(double)>;

    TangentFamily(Grid grid, Builder build, GeneratorDescriptor generator, bool self_adjoint)
        : grid_(std::move(grid)), build_(std::move(build)), generator_(std::move(generator)),
          self_adjoint_(self_adjoint) {}

    LinearOperatorRep build(double t) const {
        detail::require(t >= 0.0 && std::isfinite(t), "tangent family: t must be finite and >= 0");
        return build_(t);
    }
    LinearOperatorRep operator()(double t) const { return build(t); }

    const Grid& grid() const noexcept { return grid_; }
    const GeneratorDescriptor& generator() const noexcept { return generator_; }
    bool self_adjoint() const noexcept { return self_adjoint_; }

private:
    Grid grid_;
    Builder build_;
    GeneratorDescriptor generator_;
    bool self_adjoint_;
};

namespace detail {

inline CVector half_potential_factor(const Potential& v, double t) {
    return (-0.5 * t * v.values().array()).exp().cast<Complex>().matrix();
}

inline TangentFamily sandwich_family(const Potential& v, const Grid& grid, KernelSpec kernel, KernelRowMode mode,
                                     GeneratorDescriptor generator) {
    require_same_grid(v.grid(), grid);
    const int m = grid.size();
    auto build = [v, grid, kernel, mode, m](double t) {
        if (t == 0.0) return LinearOperatorRep::identity(m);
        CVector factor = half_potential_factor(v, t);
        return LinearOperatorRep::structured(factor, kernel_row(kernel, t, grid, mode), factor, grid.spacing());
    };
    return TangentFamily(grid, std::move(build), std::move(generator), true);
}

} // namespace detail

/// S(t) = F_t B_t F_t with F_t = exp(-tV/2) and B_t the Gaussian heat
/// convolution; tangent to (1/2) d^2/dx^2 - V.
inline TangentFamily family_heat_gauss(const Potential& v, const Grid& grid,
                                       KernelRowMode mode = KernelRowMode::periodized) {
    return detail::sandwich_family(v, grid, {KernelKind::gauss, 0}, mode,
                                   {GeneratorKind::half_laplacian_minus_V, v, 0});
}

/// S(t) = F_{1/2}(t) B(t) F_{1/2}(t) with B(t) convolution by the polyharmonic
/// kernel l(t, .); tangent to -(-d^2/dx^2)^N - V.
inline TangentFamily family_polyharmonic(const Potential& v, int order, const Grid& grid,
                                         KernelRowMode mode = KernelRowMode::periodized) {
    make_polyharmonic_params(order);
    return detail::sandwich_family(v, grid, {KernelKind::polyharmonic, order}, mode,
                                   {GeneratorKind::neg_polyharmonic_minus_V, v, order});
}

/// The unsymmetrized composite F(t) B(t) with F(t) = exp(-tV): the same
/// generator as the sandwich form but not self-adjoint when V varies.
inline TangentFamily family_one_sided(const Potential& v, const Grid& grid, KernelSpec kernel,
                                      KernelRowMode mode = KernelRowMode::periodized) {
    detail::require_same_grid(v.grid(), grid);
    const int m = grid.size();
    auto build = [v, grid, kernel, mode, m](double t) {
        if (t == 0.0) return LinearOperatorRep::identity(m);
        CVector left = (-t * v.values().array()).exp().cast<Complex>().matrix();
        CVector right = CVector::Ones(m);
        return LinearOperatorRep::structured(std::move(left), kernel_row(kernel, t, grid, mode), std::move(right),
                                             grid.spacing());
    };
    const GeneratorKind kind = kernel.kind == KernelKind::gauss ? GeneratorKind::half_laplacian_minus_V
                                                                : GeneratorKind::neg_polyharmonic_minus_V;
    return TangentFamily(grid, std::move(build), {kind, v, kernel.kind == KernelKind::gauss ? 0 : kernel.order},
                         false);
}

/// t -> exp(tH) for a dense generator H, computed by scaling and squaring.
inline TangentFamily family_exact_semigroup(const Grid& grid, const LinearOperatorRep& generator) {
    detail::require(generator.size() == grid.size(), "exact semigroup family: generator size differs from grid");
    const bool hermitian = hermiticity_defect(generator) <= 1e-10;
    auto build = [generator](double t) {
        if (t == 0.0) return LinearOperatorRep::identity(generator.size());
        return exp_bounded(affine(0.0, t, generator), ScalingSquaring{});
    };
    return TangentFamily(grid, std::move(build), {GeneratorKind::custom, std::nullopt, 0}, hermitian);
}

/// Negative control: t -> scale * S(t). With scale != 1 the family misses S(0) = I.
inline TangentFamily family_scaled(const TangentFamily& s, double scale) {
    auto build = [s, scale](double t) { return affine(0.0, scale, s.build(t)); };
    return TangentFamily(s.grid(), std::move(build), {GeneratorKind::custom, std::nullopt, 0}, s.self_adjoint());
}

/// Negative control: t -> S(t) + shift * t * I, tangent to H + shift instead of H.
inline TangentFamily family_generator_shift(const TangentFamily& s, double shift) {
    auto build = [s, shift](double t) { return affine(shift * t, 1.0, s.build(t)); };
    return TangentFamily(s.grid(), std::move(build), {GeneratorKind::custom, std::nullopt, 0}, s.self_adjoint());
}

/// t -> (S(t) + S(t)^*)/2.
inline TangentFamily symmetrize_family(const TangentFamily& s) {
    const int m = s.grid().size();
    auto build = [s, m](double t) {
        if (t == 0.0) return LinearOperatorRep::identity(m);
        return hermitize(s.build(t));
    };
    return TangentFamily(s.grid(), std::move(build), s.generator(), true);
}

/// Affine multi-point combination of a family.
///
/// coeffs[0] multiplies I (scalings[0] is ignored); coeffs[j], j >= 1,
/// multiplies S(scalings[j] * t). The coefficients may be given in one of
/// two normalizations, told apart by their sum:
///  - sum = 1: they describe the new family directly,
///      S'(t) = c0 I + sum_j c_j S(s_j t);
///  - sum = 0: they describe a finite-difference stencil for t S'(0),
///      S'(t) = I + c0 I + sum_j c_j S(s_j t)
///    (e.g. -3/2, 2, -1/2 at scalings 1, 2).
/// Either way the first moment sum_j c_j s_j must equal 1 so S' keeps the
/// generator of S.
inline TangentFamily multipoint_family(const TangentFamily& s, std::vector<double> coeffs,
                                       std::vector<double> scalings) {
    constexpr double tol = 1e-12;
    detail::require(coeffs.size() == scalings.size() && !coeffs.empty(),
                    "multipoint_family: coeffs and scalings must have the same nonzero length");
    double sum = 0.0;
    double moment = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        sum += coeffs[j];
        if (j > 0) {
            detail::require(scalings[j] > 0.0, "multipoint_family: scalings must be positive");
            moment += coeffs[j] * scalings[j];
        }
    }
    const bool direct = std::abs(sum - 1.0) <= tol;
    const bool stencil = std::abs(sum) <= tol;
    if (!direct && !stencil)
        throw InvalidArgument("multipoint_family: coefficients must sum to 1 (family) or 0 (stencil), got " +
                              std::to_string(sum));
    if (std::abs(moment - 1.0) > tol)
        throw InvalidArgument("multipoint_family: first moment sum c_j s_j must be 1, got " + std::to_string(moment));

    const double identity_coeff = coeffs[0] + (stencil ? 1.0 : 0.0);
    const int m = s.grid().size();
    auto build = [s, coeffs = std::move(coeffs), scalings = std::move(scalings), identity_coeff, m](double t) {
        if (t == 0.0) return LinearOperatorRep::identity(m);
        std::vector<LinearOperatorRep::Term> terms;
        for (std::size_t j = 1; j < coeffs.size(); ++j) {
            if (coeffs[j] == 0.0) continue;
            terms.push_back({coeffs[j], s.build(scalings[j] * t)});
        }
        if (identity_coeff == 0.0 && terms.size() == 1 && terms.front().coeff == Complex{1.0, 0.0})
            return terms.front().op;
        return LinearOperatorRep::combination(m, identity_coeff, std::move(terms));
    };
    return TangentFamily(s.grid(), std::move(build), s.generator(), s.self_adjoint());
}

/// The three-point stencil -3/2 I + 2 S(t) - 1/2 S(2t) for t S'(0).
inline TangentFamily three_point_family(const TangentFamily& s) {
    return multipoint_family(s, {-1.5, 2.0, -0.5}, {0.0, 1.0, 2.0});
}

/// Max-entry deviation of S(0) from the identity.
inline double check_ct2(const TangentFamily& s) {
    const int m = s.grid().size();
    return (s.build(0.0).matrix() - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
}

struct TangencyReport {
    std::vector<double> t_samples;
    std::vector<double> residual_norms;
    double fitted_slope = 0.0;
    double fitted_intercept = 0.0;
};

/// 1e-2 * 2^-j, j = 0..6.
inline std::vector<double> default_tangency_samples() {
    std::vector<double> t;
    for (int j = 0; j <= 6; ++j) t.push_back(1e-2 * std::ldexp(1.0, -j));
    return t;
}

/// Relative residuals ||(S(t)f - f)/t - Hf|| / ||f|| and their log-log slope in t.
inline TangencyReport measure_tangency(const TangentFamily& s, const WaveFunction& f,
                                       const LinearOperatorRep& generator, std::vector<double> t_samples) {
    detail::require_same_grid(s.grid(), f.grid());
    detail::require(generator.size() == f.size(), "measure_tangency: generator size differs from state");
    detail::require(t_samples.size() >= 2, "measure_tangency: need at least two t samples");
    for (std::size_t j = 0; j < t_samples.size(); ++j) {
        detail::require(t_samples[j] >= 1e-6, "measure_tangency: t samples must be >= 1e-6");
        if (j > 0) detail::require(t_samples[j] < t_samples[j - 1], "measure_tangency: t samples must decrease");
    }
    const double f_norm = l2_norm(f);
    detail::require(f_norm > 0.0, "measure_tangency: state must be nonzero");

    const CVector hf = generator.apply(f.values());
    TangencyReport report;
    report.t_samples = std::move(t_samples);
    for (double t : report.t_samples) {
        const CVector sf = s.build(t).apply(f.values());
        const CVector residual = (sf - f.values()) / t - hf;
        report.residual_norms.push_back(l2_norm(residual, f.grid().spacing()) / f_norm);
    }
    const LineFit fit = log_log_fit(report.t_samples, report.residual_norms);
    report.fitted_slope = fit.slope;
    report.fitted_intercept = fit.intercept;
    return report;
}

} // namespace qfey
