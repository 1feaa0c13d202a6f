#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "families.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "operators.hpp"

namespace qfey {

enum class FormulaId {
    F1_product,        // (e^{ia(S(|t/n|)-I) sign t})^n f
    F1_merged,         // e^{ian(S(|t/n|)-I) sign t} f
    F2_taylor,         // sum_m (ian sign t)^m / m! (S - I)^m f
    F3_binomial,       // F2 with (S - I)^m expanded binomially
    F4_euler,          // [(1 - ian sign t / k) I + (ian sign t / k) S]^k f
    F5_euler_binomial, // F4 expanded binomially
    F6_full_binomial,  // F5 with (k - ian sign t)^{k-q} expanded again
};

inline constexpr std::array<FormulaId, 7> kAllFormulas = {
    FormulaId::F1_product,  FormulaId::F1_merged,        FormulaId::F2_taylor,       FormulaId::F3_binomial,
    FormulaId::F4_euler,    FormulaId::F5_euler_binomial, FormulaId::F6_full_binomial};

inline std::string_view to_string(FormulaId id) {
    switch (id) {
    case FormulaId::F1_product: return "F1_product";
    case FormulaId::F1_merged: return "F1_merged";
    case FormulaId::F2_taylor: return "F2_taylor";
    case FormulaId::F3_binomial: return "F3_binomial";
    case FormulaId::F4_euler: return "F4_euler";
    case FormulaId::F5_euler_binomial: return "F5_euler_binomial";
    case FormulaId::F6_full_binomial: return "F6_full_binomial";
    }
    return "?";
}

inline FormulaId parse_formula_id(std::string_view text) {
    for (FormulaId id : kAllFormulas)
        if (to_string(id) == text) return id;
    throw InvalidArgument("unknown formula id '" + std::string(text) + "'");
}

inline bool is_binomial(FormulaId id) {
    return id == FormulaId::F3_binomial || id == FormulaId::F5_euler_binomial || id == FormulaId::F6_full_binomial;
}

// Binomial re-expansions lose precision quickly: coefficients grow like n^k/k!.
inline constexpr int kBinomialMaxN = 8;
inline constexpr int kBinomialMaxK = 40;

/// A binomial formula was requested outside n <= 8, k <= 40.
class FormulaGuardViolation : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct PropagationSpec {
    double a = 1.0;
    double t = 0.0;
    int n = 1;
    ExpMethod exp_method = ScalingSquaring{};
    FormulaId formula = FormulaId::F1_product;
};

inline void validate(const PropagationSpec& spec) {
    detail::require(spec.a != 0.0 && std::isfinite(spec.a), "propagation: a must be finite and nonzero");
    detail::require(std::isfinite(spec.t), "propagation: t must be finite");
    detail::require(spec.n >= 1, "propagation: n must be >= 1");
    validate(spec.exp_method);
}

/// sign(0) = 0, which makes every formula the identity at t = 0.
inline double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

/// S(|t|/n) - I, unevaluated.
inline LinearOperatorRep chernoff_increment(const TangentFamily& s, double t, int n) {
    return affine(-1.0, 1.0, s.build(std::abs(t) / n));
}

/// i a n sign(t) (S(|t|/n) - I), unevaluated.
inline LinearOperatorRep quasi_feynman_exponent(const TangentFamily& s, double a, double t, int n) {
    detail::require(a != 0.0, "quasi-Feynman: a must be nonzero");
    detail::require(n >= 1, "quasi-Feynman: n must be >= 1");
    const Complex c(0.0, a * n * sign(t));
    return affine(-c, c, s.build(std::abs(t) / n));
}

/// Dense e^{ian(S(|t/n|) - I) sign t}; identity at t = 0.
inline LinearOperatorRep quasi_feynman_step(const TangentFamily& s, double a, double t, int n,
                                            const ExpMethod& method = ScalingSquaring{}) {
    detail::require(a != 0.0, "quasi-Feynman: a must be nonzero");
    detail::require(n >= 1, "quasi-Feynman: n must be >= 1");
    const int m = s.grid().size();
    if (t == 0.0) return densify(LinearOperatorRep::identity(m));
    return exp_bounded(quasi_feynman_exponent(s, a, t, n), method);
}

namespace detail {

inline CVector product_path(const TangentFamily& s, const PropagationSpec& spec, const CVector& f) {
    const LinearOperatorRep increment = chernoff_increment(s, spec.t, spec.n);
    const Complex scale(0.0, spec.a * sign(spec.t));
    CVector v = f;
    for (int step = 0; step < spec.n; ++step) {
        try {
            v = exp_action(increment, scale, v, spec.exp_method);
        } catch (const NonConvergence& e) {
            throw NonConvergence(std::string(e.what()) + " (n = " + std::to_string(spec.n) + ")", spec.n);
        }
    }
    return v;
}

inline CVector merged_path(const TangentFamily& s, const PropagationSpec& spec, const CVector& f) {
    const LinearOperatorRep increment = chernoff_increment(s, spec.t, spec.n);
    const Complex scale(0.0, spec.a * spec.n * sign(spec.t));
    try {
        return exp_action(increment, scale, f, spec.exp_method);
    } catch (const NonConvergence& e) {
        throw NonConvergence(std::string(e.what()) + " (n = " + std::to_string(spec.n) + ")", spec.n);
    }
}

// Accumulates sum_q w_q S^q f from coefficients known by log-magnitude and
// phase, checking for overflow and for cancellation between terms.
class BinomialAccumulator {
public:
    explicit BinomialAccumulator(int k) : coeffs_(k + 1, Complex{0.0, 0.0}), magnitude_(k + 1, 0.0) {}

    void add(int power, double log_magnitude, double phase) {
        if (!std::isfinite(log_magnitude)) return; // exact zero
        if (log_magnitude > 700.0)
            throw NumericalError("binomial formula: coefficient overflow (log magnitude " +
                                 std::to_string(log_magnitude) + ")");
        const double mag = std::exp(log_magnitude);
        coeffs_[power] += std::polar(mag, phase);
        magnitude_[power] += mag;
    }

    CVector combine(const std::vector<CVector>& powers) const {
        CVector out = CVector::Zero(powers.front().size());
        double absolute = 0.0;
        for (std::size_t q = 0; q < coeffs_.size(); ++q) {
            out += coeffs_[q] * powers[q];
            absolute += magnitude_[q] * powers[q].norm();
        }
        const double result = out.norm();
        if (result > 0.0 && absolute / result > 1e6)
            throw NumericalError("binomial formula: cancellation amplifies rounding by " +
                                 std::to_string(absolute / result));
        return out;
    }

private:
    std::vector<Complex> coeffs_;
    std::vector<double> magnitude_;
};

inline std::vector<CVector> powers_of(const LinearOperatorRep& s, const CVector& f, int k) {
    std::vector<CVector> powers;
    powers.reserve(k + 1);
    powers.push_back(f);
    for (int q = 1; q <= k; ++q) powers.push_back(s.apply(powers.back()));
    return powers;
}

inline double log_factorial(int k) { return std::lgamma(k + 1.0); }

} // namespace detail

/// Finite-k value of one of the expanded formulas F2..F6 at subdivision n.
inline WaveFunction evaluate_formula(const TangentFamily& s, const PropagationSpec& spec, const WaveFunction& f,
                                     int k) {
    validate(spec);
    detail::require_same_grid(s.grid(), f.grid());
    detail::require(k >= 1, "evaluate_formula: k must be >= 1");
    const FormulaId id = spec.formula;
    detail::require(id != FormulaId::F1_product && id != FormulaId::F1_merged,
                    "evaluate_formula: F1 variants are propagated, not expanded");
    if (is_binomial(id) && (spec.n > kBinomialMaxN || k > kBinomialMaxK))
        throw FormulaGuardViolation(std::string(to_string(id)) + ": binomial formulas need n <= 8 and k <= 40");
    if (spec.t == 0.0) return f;

    const Complex c(0.0, spec.a * spec.n * sign(spec.t));
    const LinearOperatorRep step = s.build(std::abs(spec.t) / spec.n);
    const CVector& v = f.values();

    switch (id) {
    case FormulaId::F2_taylor: {
        CVector term = v;
        CVector sum = v;
        for (int m = 1; m <= k; ++m) {
            term = (c / static_cast<double>(m)) * (step.apply(term) - term);
            sum += term;
        }
        return f.with_values(std::move(sum));
    }
    case FormulaId::F4_euler: {
        const Complex w = c / static_cast<double>(k);
        CVector out = v;
        for (int j = 0; j < k; ++j) out = (1.0 - w) * out + w * step.apply(out);
        return f.with_values(std::move(out));
    }
    default: break;
    }

    const std::vector<CVector> powers = detail::powers_of(step, v, k);
    detail::BinomialAccumulator acc(k);
    const double log_c = std::log(std::abs(c));
    const double arg_c = std::arg(c);
    const double pi = std::numbers::pi;
    using detail::log_factorial;

    if (id == FormulaId::F3_binomial) {
        // sum_{m<=k} sum_{q<=m} (-1)^{m-q} c^m / (q! (m-q)!) S^q f
        for (int m = 0; m <= k; ++m)
            for (int q = 0; q <= m; ++q)
                acc.add(q, m * log_c - log_factorial(q) - log_factorial(m - q), (m - q) * pi + m * arg_c);
    } else if (id == FormulaId::F5_euler_binomial) {
        // sum_q k! (k - c)^{k-q} c^q / (q! (k-q)! k^k) S^q f
        const Complex kc = static_cast<double>(k) - c;
        const double log_kc = std::log(std::abs(kc));
        const double arg_kc = std::arg(kc);
        for (int q = 0; q <= k; ++q)
            acc.add(q,
                    log_factorial(k) - log_factorial(q) - log_factorial(k - q) + (k - q) * log_kc + q * log_c -
                        k * std::log(static_cast<double>(k)),
                    (k - q) * arg_kc + q * arg_c);
    } else {
        // sum_m sum_{q<=k-m} (-1)^{k-m-q} k! c^{k-q} / (m! q! (k-m-q)! k^{k-q}) S^m f
        const double log_k = std::log(static_cast<double>(k));
        for (int m = 0; m <= k; ++m)
            for (int q = 0; q <= k - m; ++q)
                acc.add(m,
                        log_factorial(k) - log_factorial(m) - log_factorial(q) - log_factorial(k - m - q) +
                            (k - q) * (log_c - log_k),
                        (k - m - q) * pi + (k - q) * arg_c);
    }
    return f.with_values(acc.combine(powers));
}

struct InnerLimit {
    WaveFunction value;
    int k = 0;
    double last_difference = 0.0;
    bool converged = false;
};

/// Runs k upward until successive values of an expanded formula differ by
/// less than tol in L2 (twice in a row), or the k schedule is exhausted.
/// F2 and F3 step k by one; the Euler-type formulas double it.
inline InnerLimit resolve_inner_limit(const TangentFamily& s, const PropagationSpec& spec, const WaveFunction& f,
                                      double tol = 1e-10) {
    std::vector<int> schedule;
    switch (spec.formula) {
    case FormulaId::F2_taylor:
        for (int k = 1; k <= 400; ++k) schedule.push_back(k);
        break;
    case FormulaId::F3_binomial:
        for (int k = 1; k <= kBinomialMaxK; ++k) schedule.push_back(k);
        break;
    case FormulaId::F4_euler:
        for (int k = 1; k <= (1 << 16); k *= 2) schedule.push_back(k);
        break;
    case FormulaId::F5_euler_binomial:
    case FormulaId::F6_full_binomial:
        for (int k = 1; k < kBinomialMaxK; k *= 2) schedule.push_back(k);
        schedule.push_back(kBinomialMaxK);
        break;
    default: throw InvalidArgument("resolve_inner_limit: F1 variants have no inner limit");
    }

    std::optional<WaveFunction> previous;
    int below = 0;
    double diff = 0.0;
    for (int k : schedule) {
        WaveFunction current = evaluate_formula(s, spec, f, k);
        if (previous) {
            diff = l2_distance(current, *previous);
            below = diff < tol ? below + 1 : 0;
            if (below == 2) return {std::move(current), k, diff, true};
        }
        previous = std::move(current);
    }
    return {std::move(*previous), schedule.back(), diff, false};
}

/// Approximates e^{iatH} f with the chosen formula.
inline WaveFunction evolve_schrodinger(const TangentFamily& s, const PropagationSpec& spec, const WaveFunction& f) {
    validate(spec);
    detail::require_same_grid(s.grid(), f.grid());
    if (spec.t == 0.0) return f;
    switch (spec.formula) {
    case FormulaId::F1_product: return f.with_values(detail::product_path(s, spec, f.values()));
    case FormulaId::F1_merged: return f.with_values(detail::merged_path(s, spec, f.values()));
    default: return resolve_inner_limit(s, spec, f).value;
    }
}

/// (S(t/n))^n f, approximating e^{tH} f.
inline WaveFunction evolve_heat(const TangentFamily& s, double t, int n, const WaveFunction& f) {
    detail::require(t >= 0.0 && std::isfinite(t), "evolve_heat: t must be finite and >= 0");
    detail::require(n >= 1, "evolve_heat: n must be >= 1");
    detail::require_same_grid(s.grid(), f.grid());
    if (t == 0.0) return f;
    const LinearOperatorRep step = s.build(t / n);
    CVector v = f.values();
    for (int j = 0; j < n; ++j) v = step.apply(v);
    return f.with_values(std::move(v));
}

struct ConvergenceRow {
    int n = 0;
    double l2_error = 0.0;
    double sup_error = 0.0;
    double runtime_ms = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::string reference_descriptor;

    std::vector<double> ns() const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.n);
        return out;
    }
    std::vector<double> l2_errors() const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.l2_error);
        return out;
    }
};

/// F1_product errors against a reference solution for each n in n_list.
inline ConvergenceReport run_convergence(const TangentFamily& s, double a, double t, const std::vector<int>& n_list,
                                         const WaveFunction& f, const WaveFunction& reference,
                                         std::string reference_descriptor = "reference",
                                         const ExpMethod& method = ScalingSquaring{}) {
    detail::require(!n_list.empty(), "run_convergence: n_list is empty");
    for (std::size_t j = 1; j < n_list.size(); ++j)
        detail::require(n_list[j] > n_list[j - 1], "run_convergence: n_list must be strictly increasing");
    detail::require_same_grid(f.grid(), reference.grid());

    ConvergenceReport report;
    report.reference_descriptor = std::move(reference_descriptor);
    for (int n : n_list) {
        const auto start = std::chrono::steady_clock::now();
        const WaveFunction out = evolve_schrodinger(s, {a, t, n, method, FormulaId::F1_product}, f);
        const auto stop = std::chrono::steady_clock::now();
        report.rows.push_back({n, l2_distance(out, reference), sup_distance(out, reference),
                               std::chrono::duration<double, std::milli>(stop - start).count()});
    }
    return report;
}

} // namespace qfey
