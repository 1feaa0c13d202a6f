#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <unistd.h>

#include "config.hpp"
#include "error.hpp"
#include "families.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "oracle.hpp"
#include "propagator.hpp"

namespace qfey::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNumericalFailure = 2 };

inline Grid make_grid(const RunConfig& c) { return qfey::make_grid(c.grid.x_min, c.grid.x_max, c.grid.m); }

/// The family described by the config, before the three-point and
/// negative-control wrappers.
inline TangentFamily base_family(const RunConfig& c, const Grid& grid) {
    const Potential v = make_potential(c.potential, grid);
    if (c.family == FamilyKind::heat_gauss) return family_heat_gauss(v, grid, c.kernel_mode);
    return family_polyharmonic(v, c.order, grid, c.kernel_mode);
}

inline TangentFamily make_family(const RunConfig& c, const Grid& grid) {
    TangentFamily s = base_family(c, grid);
    if (c.three_point) s = three_point_family(s);
    if (c.broken) s = family_generator_shift(s, 1.0);
    return s;
}

/// Reads `x,re_psi,im_psi[,abs_psi]` rows (the evolve output format).
inline WaveFunction read_state_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read initial state '" + path + "'");
    std::string line;
    CVector values(grid.size());
    int row = 0;
    while (std::getline(in, line)) {
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#' || trimmed.front() == 'x') continue;
        const auto fields = detail::split(trimmed, ',');
        if (fields.size() < 3) throw InvalidArgument("initial state: expected x,re,im on every row");
        if (row >= grid.size()) throw InvalidArgument("initial state: more rows than grid points");
        const double x = detail::parse_real(fields[0], "initial state");
        if (std::abs(x - grid.point(row)) > 1e-9 * grid.spacing())
            throw InvalidArgument("initial state: row " + std::to_string(row) + " is not on the grid");
        values[row] = {detail::parse_real(fields[1], "initial state"), detail::parse_real(fields[2], "initial state")};
        ++row;
    }
    if (row != grid.size()) throw InvalidArgument("initial state: fewer rows than grid points");
    return {grid, std::move(values)};
}

inline WaveFunction initial_state(const RunConfig& c, const Grid& grid) {
    if (!c.initial.empty()) return read_state_csv(c.initial, grid);
    return gaussian_packet(c.packet.x0, c.packet.p0, c.packet.sigma, grid);
}

inline std::string state_csv(const WaveFunction& psi) {
    std::string out = "x,re_psi,im_psi,abs_psi\n";
    for (int j = 0; j < psi.size(); ++j) {
        const Complex v = psi[j];
        out += format_real(psi.grid().point(j)) + ',' + format_real(v.real()) + ',' + format_real(v.imag()) + ',' +
               format_real(std::abs(v)) + '\n';
    }
    return out;
}

inline std::string evolve_csv(const RunConfig& c) {
    const Grid grid = make_grid(c);
    const TangentFamily s = make_family(c, grid);
    const WaveFunction f = initial_state(c, grid);
    const PropagationSpec spec{c.a, c.t, c.n, c.exp_method, c.formula};
    const bool expanded = c.formula != FormulaId::F1_product && c.formula != FormulaId::F1_merged;
    const WaveFunction psi = expanded && c.k > 0 ? evaluate_formula(s, spec, f, c.k) : evolve_schrodinger(s, spec, f);
    return state_csv(psi);
}

inline WaveFunction reference_solution(const RunConfig& c, const Grid& grid, const WaveFunction& f) {
    if (c.reference == ReferenceKind::analytic) {
        if (c.family != FamilyKind::heat_gauss || c.potential.tag != PotentialTag::zero || !c.initial.empty())
            throw InvalidArgument("reference analytic needs the heat-gauss family, zero potential and a packet");
        return free_packet_evolution(c.packet.x0, c.packet.p0, c.packet.sigma, c.a, c.t, grid);
    }
    const SpectralOracle oracle(oracle_generator(base_family(c, grid).generator()));
    return oracle.group(c.a, c.t, f);
}

inline std::string converge_csv(const RunConfig& c) {
    const Grid grid = make_grid(c);
    const TangentFamily s = make_family(c, grid);
    const WaveFunction f = initial_state(c, grid);
    const WaveFunction ref = reference_solution(c, grid, f);
    const ConvergenceReport report = run_convergence(
        s, c.a, c.t, c.n_list, f, ref, c.reference == ReferenceKind::oracle ? "oracle" : "analytic", c.exp_method);
    std::string out = "n,l2_error,sup_error,runtime_ms\n";
    for (const auto& row : report.rows)
        out += std::to_string(row.n) + ',' + format_real(row.l2_error) + ',' + format_real(row.sup_error) + ',' +
               format_real(row.runtime_ms) + '\n';
    return out;
}

inline std::string tangency_csv(const RunConfig& c) {
    const Grid grid = make_grid(c);
    const TangentFamily s = make_family(c, grid);
    const LinearOperatorRep generator = oracle_generator(base_family(c, grid).generator());
    const WaveFunction f = initial_state(c, grid);
    const TangencyReport report = measure_tangency(s, f, generator, c.t_samples);
    std::string out = "t,residual_norm\n";
    for (std::size_t j = 0; j < report.t_samples.size(); ++j)
        out += format_real(report.t_samples[j]) + ',' + format_real(report.residual_norms[j]) + '\n';
    out += "# slope=" + format_real(report.fitted_slope) + '\n';
    return out;
}

inline std::string kernel_csv(const RunConfig& c) {
    const Grid grid = make_grid(c);
    detail::require(c.t > 0.0, "kernel: t must be positive");
    const KernelSpec spec{c.kernel, c.order};
    const RVector row = kernel_row(spec, c.t, grid, KernelRowMode::sampled);
    const int m = grid.size();
    std::string out = "y,kernel_value\n";
    auto emit = [&](int j) { out += format_real(spectral::circular_offset(grid, j)) + ',' + format_real(row[j]) + '\n'; };
    for (int j = m / 2 + 1; j < m; ++j) emit(j);
    for (int j = 0; j <= m / 2; ++j) emit(j);
    out += "# normalization=" + format_real(kernel_mass(row, grid)) + '\n';
    return out;
}

inline std::string compare_formulas_csv(const RunConfig& c) {
    const Grid grid = make_grid(c);
    const TangentFamily s = make_family(c, grid);
    const WaveFunction f = initial_state(c, grid);
    const int k = c.k > 0 ? c.k : 30;
    PropagationSpec spec{c.a, c.t, c.n, c.exp_method, FormulaId::F1_merged};
    const WaveFunction reference = evolve_schrodinger(s, spec, f);

    std::string out = "formula_id,l2_diff_vs_F1_merged,runtime_ms\n";
    for (FormulaId id : kAllFormulas) {
        if (id == FormulaId::F1_merged) continue;
        spec.formula = id;
        if (is_binomial(id) && (spec.n > kBinomialMaxN || k > kBinomialMaxK)) {
            out += std::string(to_string(id)) + ",skipped,0\n";
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        const WaveFunction value =
            id == FormulaId::F1_product ? evolve_schrodinger(s, spec, f) : evaluate_formula(s, spec, f, k);
        const auto stop = std::chrono::steady_clock::now();
        out += std::string(to_string(id)) + ',' + format_real(l2_distance(value, reference)) + ',' +
               format_real(std::chrono::duration<double, std::milli>(stop - start).count()) + '\n';
    }
    return out;
}

/// Writes to a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file at `path`.
inline void write_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw InvalidArgument("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InvalidArgument("cannot move output into '" + path + "'");
    }
}

inline std::string run_to_string(std::string_view command, const RunConfig& c) {
    if (command == "evolve") return evolve_csv(c);
    if (command == "converge") return converge_csv(c);
    if (command == "tangency") return tangency_csv(c);
    if (command == "kernel") return kernel_csv(c);
    if (command == "compare-formulas") return compare_formulas_csv(c);
    throw InvalidArgument("unknown command '" + std::string(command) + "'");
}

/// Runs a subcommand: CSV goes to c.out (or `out` when c.out is empty), one
/// diagnostic line goes to `err` on failure. Returns the process exit code.
inline int run_command(std::string_view command, const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        const std::string csv = run_to_string(command, c);
        if (c.out.empty()) out << csv;
        else write_atomically(c.out, csv);
        return kSuccess;
    } catch (const NumericalError& e) {
        err << "qfey " << command << ": numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const InvalidArgument& e) {
        err << "qfey " << command << ": " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "qfey " << command << ": " << e.what() << '\n';
        return kNumericalFailure;
    }
}

} // namespace qfey::cli
