#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "grid.hpp"

namespace qfey::spectral {

/// Angular frequency of DFT bin k on the grid: 2*pi*k/L for k < m/2,
/// 2*pi*(k-m)/L otherwise. The Nyquist bin k = m/2 is reported as +pi/h;
/// every symbol used here is even so the sign is immaterial.
inline double frequency(const Grid& grid, int k) {
    const int m = grid.size();
    const int signed_k = k <= m / 2 ? k : k - m;
    return 2.0 * std::numbers::pi * signed_k / grid.length();
}

inline RVector frequencies(const Grid& grid) {
    RVector xi(grid.size());
    for (int k = 0; k < grid.size(); ++k) xi[k] = frequency(grid, k);
    return xi;
}

/// Signed circular distance of offset index j: j*h for j <= m/2, (j-m)*h above.
inline double circular_offset(const Grid& grid, int j) {
    const int m = grid.size();
    return (j <= m / 2 ? j : j - m) * grid.spacing();
}

namespace detail {

// FFTW plans are created once per (size, direction) under a lock (planning
// is not thread-safe) and executed on caller arrays, which is. FFTW_ESTIMATE
// keeps the chosen algorithm, and hence the rounding, identical run to run.
inline fftw_plan plan_for(int m, int sign) {
    thread_local std::map<std::pair<int, int>, fftw_plan> local;
    const auto key = std::make_pair(m, sign);
    if (const auto it = local.find(key); it != local.end()) return it->second;

    static std::mutex mutex;
    static std::map<std::pair<int, int>, fftw_plan> shared;
    const std::lock_guard<std::mutex> lock(mutex);
    auto it = shared.find(key);
    if (it == shared.end()) {
        CVector in(m), out(m);
        const fftw_plan plan = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(in.data()),
                                                reinterpret_cast<fftw_complex*>(out.data()), sign,
                                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = shared.emplace(key, plan).first;
    }
    local.emplace(key, it->second);
    return it->second;
}

inline CVector transform(const CVector& v, int sign) {
    CVector out(v.size());
    if (v.size() == 0) return out;
    // FFTW_PRESERVE_INPUT is the default for out-of-place complex transforms
    fftw_execute_dft(plan_for(static_cast<int>(v.size()), sign),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(v.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace detail

/// Unnormalized forward DFT: out_k = sum_j v_j exp(-2 pi i jk/m).
inline CVector forward(const CVector& v) { return detail::transform(v, FFTW_FORWARD); }

/// Inverse DFT including the 1/m factor.
inline CVector inverse(const CVector& v) {
    CVector out = detail::transform(v, FFTW_BACKWARD);
    out /= static_cast<double>(v.size());
    return out;
}

/// Applies the Fourier multiplier `symbol` (indexed by DFT bin) to v.
inline CVector apply_multiplier(const CVector& symbol, const CVector& v) {
    return inverse(symbol.cwiseProduct(forward(v)));
}

/// Second derivative by Fourier differentiation.
inline WaveFunction second_derivative(const WaveFunction& f) {
    const RVector xi = frequencies(f.grid());
    CVector symbol = (-xi.array().square()).cast<Complex>().matrix();
    return f.with_values(apply_multiplier(symbol, f.values()));
}

} // namespace qfey::spectral
