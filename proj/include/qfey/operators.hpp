#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "grid.hpp"
#include "spectral.hpp"

namespace qfey {

/// A bounded operator on grid functions.
///
/// Three forms:
///  - Dense: an explicit m x m matrix.
///  - Structured: f -> left .* (h * circconv(kernel_row, right .* f)).
///  - Combination: c0 * I + sum_j c_j * A_j, kept unevaluated so families
///    built from several structured pieces stay matrix-free.
///
/// Instances are immutable and cheap to copy (shared state). The dense form
/// of a non-dense operator is computed on first request and cached.
class LinearOperatorRep {
public:
    struct Dense {
        CMatrix matrix;
    };
    struct Structured {
        CVector left;
        RVector kernel_row;
        CVector right;
        double spacing = 1.0;
    };
    struct Term;
    struct Combination {
        Complex identity_coeff{0.0, 0.0};
        std::vector<Term> terms;
    };
    using Form = std::variant<Dense, Structured, Combination>;

    static LinearOperatorRep dense(CMatrix matrix) {
        detail::require(matrix.rows() == matrix.cols(), "dense operator must be square");
        const auto m = static_cast<int>(matrix.rows());
        return LinearOperatorRep(Form{Dense{std::move(matrix)}}, m);
    }

    static LinearOperatorRep structured(CVector left, RVector kernel_row, CVector right, double spacing) {
        const auto m = static_cast<int>(kernel_row.size());
        detail::require(left.size() == m && right.size() == m, "structured operator: dimension mismatch");
        detail::require(spacing > 0.0, "structured operator: spacing must be positive");
        LinearOperatorRep op(Form{Structured{std::move(left), std::move(kernel_row), std::move(right), spacing}}, m);
        return op;
    }

    static LinearOperatorRep combination(int m, Complex identity_coeff, std::vector<Term> terms);

    static LinearOperatorRep identity(int m) { return combination(m, 1.0, {}); }

    int size() const noexcept { return node_->size; }
    const Form& form() const noexcept { return node_->form; }
    bool is_dense() const noexcept { return std::holds_alternative<Dense>(node_->form); }

    /// Matrix-free action on a raw coefficient vector.
    CVector apply(const CVector& v) const;

    /// Dense matrix of the operator, cached after the first call.
    const CMatrix& matrix() const;

private:
    struct Node {
        Form form;
        int size = 0;
        CVector kernel_spectrum; // h * DFT(kernel_row), structured only
        mutable std::once_flag dense_once;
        mutable std::unique_ptr<CMatrix> dense_cache;
    };

    LinearOperatorRep(Form form, int m) {
        auto node = std::make_shared<Node>();
        node->size = m;
        if (auto* s = std::get_if<Structured>(&form))
            node->kernel_spectrum = s->spacing * spectral::forward(s->kernel_row.cast<Complex>());
        node->form = std::move(form);
        node_ = std::move(node);
    }

    CMatrix build_matrix() const;

    std::shared_ptr<const Node> node_;
};

struct LinearOperatorRep::Term {
    Complex coeff;
    LinearOperatorRep op;
};

inline LinearOperatorRep LinearOperatorRep::combination(int m, Complex identity_coeff, std::vector<Term> terms) {
    for (const auto& term : terms) detail::require(term.op.size() == m, "combination: dimension mismatch");
    return LinearOperatorRep(Form{Combination{identity_coeff, std::move(terms)}}, m);
}

inline CVector LinearOperatorRep::apply(const CVector& v) const {
    detail::require(v.size() == size(), "apply: dimension mismatch");
    const Form& f = node_->form;
    if (const auto* d = std::get_if<Dense>(&f)) return d->matrix * v;
    if (const auto* s = std::get_if<Structured>(&f)) {
        const CVector inner = s->right.cwiseProduct(v);
        const CVector conv = spectral::inverse(node_->kernel_spectrum.cwiseProduct(spectral::forward(inner)));
        return s->left.cwiseProduct(conv);
    }
    const auto& c = std::get<Combination>(f);
    CVector out = c.identity_coeff * v;
    for (const auto& term : c.terms) out += term.coeff * term.op.apply(v);
    return out;
}

inline const CMatrix& LinearOperatorRep::matrix() const {
    if (const auto* d = std::get_if<Dense>(&node_->form)) return d->matrix;
    std::call_once(node_->dense_once, [this] { node_->dense_cache = std::make_unique<CMatrix>(build_matrix()); });
    return *node_->dense_cache;
}

inline CMatrix LinearOperatorRep::build_matrix() const {
    const int m = size();
    const Form& f = node_->form;
    if (const auto* s = std::get_if<Structured>(&f)) {
        // entry (i, l) = left_i * h * k[(i - l) mod m] * right_l
        CMatrix out(m, m);
        for (int l = 0; l < m; ++l)
            for (int i = 0; i < m; ++i)
                out(i, l) = s->left[i] * (s->spacing * s->kernel_row[((i - l) % m + m) % m]) * s->right[l];
        return out;
    }
    const auto& c = std::get<Combination>(f);
    CMatrix out = c.identity_coeff * CMatrix::Identity(m, m);
    for (const auto& term : c.terms) out += term.coeff * term.op.matrix();
    return out;
}

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

inline WaveFunction apply(const LinearOperatorRep& op, const WaveFunction& f) {
    detail::require(op.size() == f.size(), "apply: operator and state dimensions differ");
    return f.with_values(op.apply(f.values()));
}

inline LinearOperatorRep densify(const LinearOperatorRep& op) {
    if (op.is_dense()) return op;
    return LinearOperatorRep::dense(op.matrix());
}

inline LinearOperatorRep adjoint(const LinearOperatorRep& op) {
    const auto& form = op.form();
    if (const auto* d = std::get_if<LinearOperatorRep::Dense>(&form))
        return LinearOperatorRep::dense(d->matrix.adjoint());
    if (const auto* s = std::get_if<LinearOperatorRep::Structured>(&form)) {
        const int m = op.size();
        RVector reversed(m);
        for (int j = 0; j < m; ++j) reversed[j] = s->kernel_row[(m - j) % m];
        return LinearOperatorRep::structured(s->right.conjugate(), std::move(reversed), s->left.conjugate(),
                                             s->spacing);
    }
    const auto& c = std::get<LinearOperatorRep::Combination>(form);
    std::vector<LinearOperatorRep::Term> terms;
    terms.reserve(c.terms.size());
    for (const auto& term : c.terms) terms.push_back({std::conj(term.coeff), adjoint(term.op)});
    return LinearOperatorRep::combination(op.size(), std::conj(c.identity_coeff), std::move(terms));
}

/// Dense (A + A*)/2.
inline LinearOperatorRep hermitize(const LinearOperatorRep& op) {
    const CMatrix& a = op.matrix();
    CMatrix h = 0.5 * (a + a.adjoint());
    return LinearOperatorRep::dense(std::move(h));
}

/// c0 * I + c1 * A, unevaluated.
inline LinearOperatorRep affine(Complex identity_coeff, Complex coeff, const LinearOperatorRep& op) {
    return LinearOperatorRep::combination(op.size(), identity_coeff, {{coeff, op}});
}

inline double max_entry_difference(const LinearOperatorRep& a, const LinearOperatorRep& b) {
    detail::require(a.size() == b.size(), "max_entry_difference: dimension mismatch");
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const LinearOperatorRep& op) {
    const CMatrix& a = op.matrix();
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Upper bound on the spectral norm, computed without densifying.
inline double norm_bound(const LinearOperatorRep& op) {
    const auto& form = op.form();
    if (const auto* d = std::get_if<LinearOperatorRep::Dense>(&form)) {
        const double one = d->matrix.cwiseAbs().colwise().sum().maxCoeff();
        const double inf = d->matrix.cwiseAbs().rowwise().sum().maxCoeff();
        return std::sqrt(one * inf);
    }
    if (const auto* s = std::get_if<LinearOperatorRep::Structured>(&form)) {
        // |DFT(h k)| bounds the convolution; rows are real so use the direct sum as a cheap cap
        const CVector spectrum = s->spacing * spectral::forward(s->kernel_row.cast<Complex>());
        return s->left.cwiseAbs().maxCoeff() * spectrum.cwiseAbs().maxCoeff() * s->right.cwiseAbs().maxCoeff();
    }
    const auto& c = std::get<LinearOperatorRep::Combination>(form);
    double bound = std::abs(c.identity_coeff);
    for (const auto& term : c.terms) bound += std::abs(term.coeff) * norm_bound(term.op);
    return bound;
}

// ---------------------------------------------------------------------------
// Exponential of a bounded operator
// ---------------------------------------------------------------------------

/// Truncated power series; stops once three consecutive terms fall below
/// tol relative to the partial sum.
struct Taylor {
    int k_max = 400;
    double tol = 1e-15;

    bool operator==(const Taylor&) const = default;
};

/// (I + A/k)^k.
struct Euler {
    long k = 1L << 20;

    bool operator==(const Euler&) const = default;
};

/// e^{A/2^s} squared s times, with ||A||/2^s <= 0.5.
struct ScalingSquaring {
    double target_tol = 1e-16;

    bool operator==(const ScalingSquaring&) const = default;
};

using ExpMethod = std::variant<Taylor, Euler, ScalingSquaring>;

inline void validate(const ExpMethod& method) {
    if (const auto* t = std::get_if<Taylor>(&method)) {
        detail::require(t->k_max >= 1, "taylor: k_max must be >= 1");
        detail::require(t->tol > 0.0, "taylor: tol must be positive");
    } else if (const auto* e = std::get_if<Euler>(&method)) {
        detail::require(e->k >= 1, "euler: k must be >= 1");
    } else {
        detail::require(std::get<ScalingSquaring>(method).target_tol > 0.0, "scaling-squaring: tol must be positive");
    }
}

namespace detail {

inline double norm1(const CMatrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

inline CMatrix taylor_matrix(const CMatrix& a, int k_max, double tol) {
    const auto m = a.rows();
    CMatrix sum = CMatrix::Identity(m, m);
    CMatrix term = CMatrix::Identity(m, m);
    int small = 0;
    for (int j = 1; j <= k_max; ++j) {
        term = (term * a) / static_cast<double>(j);
        sum += term;
        if (norm1(term) <= tol * std::max(1.0, norm1(sum))) {
            if (++small == 3) return sum;
        } else {
            small = 0;
        }
    }
    throw NonConvergence("taylor: k_max = " + std::to_string(k_max) + " reached before tolerance", k_max);
}

inline CMatrix matrix_power(CMatrix base, long k) {
    const auto m = base.rows();
    CMatrix result = CMatrix::Identity(m, m);
    bool first = true;
    while (k > 0) {
        if (k & 1) {
            result = first ? base : CMatrix(result * base);
            first = false;
        }
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

// One stretch of the series sum_j A^j v / j!, stopping on three consecutive
// terms below tol * ||v||.
inline CVector taylor_action(const LinearOperatorRep& op, Complex scale, const CVector& v, int k_max, double tol) {
    CVector sum = v;
    CVector term = v;
    const double ref = v.norm();
    if (ref == 0.0) return sum;
    int small = 0;
    for (int j = 1; j <= k_max; ++j) {
        term = (scale / static_cast<double>(j)) * op.apply(term);
        sum += term;
        if (term.norm() <= tol * ref) {
            if (++small == 3) return sum;
        } else {
            small = 0;
        }
    }
    throw NonConvergence("taylor: k_max = " + std::to_string(k_max) + " reached before tolerance", k_max);
}

inline int squaring_exponent(double norm) {
    int s = 0;
    while (std::ldexp(norm, -s) > 0.5) ++s;
    return s;
}

} // namespace detail

/// Dense approximation of e^A by the chosen method.
inline LinearOperatorRep exp_bounded(const LinearOperatorRep& op, const ExpMethod& method = ScalingSquaring{}) {
    validate(method);
    const CMatrix& a = op.matrix();
    if (!a.allFinite()) throw NumericalError("exp_bounded: operator has non-finite entries");
    const auto m = a.rows();
    if (const auto* t = std::get_if<Taylor>(&method))
        return LinearOperatorRep::dense(detail::taylor_matrix(a, t->k_max, t->tol));
    if (const auto* e = std::get_if<Euler>(&method)) {
        CMatrix base = CMatrix::Identity(m, m) + a / static_cast<double>(e->k);
        return LinearOperatorRep::dense(detail::matrix_power(std::move(base), e->k));
    }
    const double tol = std::get<ScalingSquaring>(method).target_tol;
    const int s = detail::squaring_exponent(detail::norm1(a));
    CMatrix result = detail::taylor_matrix(std::ldexp(1.0, -s) * a, 200, tol);
    for (int j = 0; j < s; ++j) result = result * result;
    return LinearOperatorRep::dense(std::move(result));
}

/// Matrix-free e^{scale * A} v.
///
/// taylor: the series is summed over ceil(||scale A|| / 2) equal sub-intervals
/// so no partial sum passes through the large intermediate terms of a long
/// series. scaling_squaring: the same idea with sub-intervals of norm at
/// most 0.5. euler: k applications of I + scale*A/k.
inline CVector exp_action(const LinearOperatorRep& op, Complex scale, const CVector& v,
                          const ExpMethod& method = ScalingSquaring{}) {
    validate(method);
    detail::require(v.size() == op.size(), "exp_apply: dimension mismatch");
    if (scale == Complex{0.0, 0.0}) return v;
    const double nu = std::abs(scale) * norm_bound(op);
    if (!std::isfinite(nu)) throw NumericalError("exp_apply: operator norm is not finite");
    if (const auto* e = std::get_if<Euler>(&method)) {
        CVector out = v;
        const Complex step = scale / static_cast<double>(e->k);
        for (long j = 0; j < e->k; ++j) out += step * op.apply(out);
        return out;
    }
    long pieces = 1;
    int k_max = 200;
    double tol = 1e-16;
    if (const auto* t = std::get_if<Taylor>(&method)) {
        pieces = std::max(1L, static_cast<long>(std::ceil(nu / 2.0)));
        k_max = t->k_max;
        tol = t->tol;
    } else {
        // Applying e^{A/p} p times plays the role of squaring; p need not be
        // a power of two for the action, only large enough that ||A||/p <= 0.5.
        pieces = std::max(1L, static_cast<long>(std::ceil(nu / 0.5)));
        tol = std::get<ScalingSquaring>(method).target_tol;
    }
    const Complex piece_scale = scale / static_cast<double>(pieces);
    CVector out = v;
    for (long j = 0; j < pieces; ++j) out = detail::taylor_action(op, piece_scale, out, k_max, tol);
    return out;
}

inline WaveFunction exp_apply(const LinearOperatorRep& op, const WaveFunction& f,
                              const ExpMethod& method = ScalingSquaring{}) {
    return f.with_values(exp_action(op, 1.0, f.values(), method));
}

} // namespace qfey
