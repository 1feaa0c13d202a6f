// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qfey/qfey.hpp"

namespace {

using namespace qfey;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

const Grid& default_grid() {
    static const Grid g = make_grid(-20.0, 20.0, 256);
    return g;
}

Potential cosine(const Grid& g) { return make_potential({PotentialTag::cosine, 1.0, 1.0}, g); }

WaveFunction reference_packet(const Grid& g) { return gaussian_packet(0.0, 2.0, 1.0, g); }

std::vector<double> geometric_samples(double t0) {
    std::vector<double> t;
    for (int j = 0; j <= 6; ++j) t.push_back(t0 * std::ldexp(1.0, -j));
    return t;
}

// ---------------------------------------------------------------------------

Outcome unitarity() {
    const auto start = Clock::now();
    const Grid& g = default_grid();
    struct Case {
        std::string name;
        TangentFamily family;
    };
    std::vector<Case> cases;
    const PotentialPreset presets[] = {{PotentialTag::zero, 0, 0},
                                       {PotentialTag::cosine, 1.0, 1.0},
                                       {PotentialTag::sech2, 1.0, 1.0},
                                       {PotentialTag::gaussian_well, 1.0, 1.0}};
    for (const auto& p : presets) cases.push_back({"heat-gauss/" + to_string(p), family_heat_gauss(make_potential(p, g), g)});
    for (int order : {2, 3})
        cases.push_back({"polyharmonic" + std::to_string(order), family_polyharmonic(cosine(g), order, g)});

    // a generic state touches every Fourier mode
    std::mt19937_64 gen(7);
    std::normal_distribution<double> normal;
    CVector values(g.size());
    for (auto& v : values) v = {normal(gen), normal(gen)};
    const WaveFunction f(g, values);
    const double f_norm = l2_norm(f);

    double worst_step = 0.0, worst_run = 0.0, worst_path = 0.0;
    long steps = 0;
    // Full n sweep with the tolerance-terminated Taylor action; the default
    // scaling-and-squaring steps are covered on n = 1, 2, 4, ..., 64.
    auto sweep = [&](const TangentFamily& family, double t, double a, int n, const ExpMethod& method) {
        // the product path, with the norm checked after every step
        const LinearOperatorRep increment = chernoff_increment(family, t, n);
        CVector v = f.values();
        double v_norm = f_norm;
        for (int step = 0; step < n; ++step, ++steps) {
            v = exp_action(increment, Complex(0.0, a), v, method);
            const double next = l2_norm(v, g.spacing());
            worst_step = std::max(worst_step, std::abs(next / v_norm - 1.0));
            v_norm = next;
        }
        worst_run = std::max(worst_run, std::abs(v_norm / f_norm - 1.0));
        if (n == 1 || n == 64) {
            // the library path performs the same steps
            const WaveFunction lib = evolve_schrodinger(family, {a, t, n, method}, f);
            worst_path = std::max(worst_path, l2_distance(lib, f.with_values(v)) / f_norm);
            worst_run = std::max(worst_run, std::abs(l2_norm(lib) / f_norm - 1.0));
        }
    };
    for (const auto& c : cases)
        for (double t : {0.25, 0.5, 1.0})
            for (double a : {1.0, -1.0}) {
                for (int n = 1; n <= 64; ++n) sweep(c.family, t, a, n, Taylor{});
                for (int n = 1; n <= 64; n *= 2) sweep(c.family, t, a, n, ScalingSquaring{});
            }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool pass = worst_step <= 1e-9 && worst_run <= 1e-9 && worst_path <= 1e-12 && seconds < 60.0;
    return {pass, std::to_string(cases.size()) + " families, " + std::to_string(steps) +
                      " steps; max step drift " + fmt(worst_step) + ", max propagation drift " + fmt(worst_run) +
                      ", library vs checked path " + fmt(worst_path) + ", " + fmt(seconds) + " s"};
}

Outcome chernoff_convergence() {
    const auto start = Clock::now();
    const Grid& g = default_grid();
    const TangentFamily s = family_heat_gauss(cosine(g), g);
    const WaveFunction f = reference_packet(g);
    const WaveFunction ref = SpectralOracle(oracle_generator(s.generator())).group(1.0, 0.5, f);
    const ConvergenceReport r = run_convergence(s, 1.0, 0.5, {4, 8, 16, 32, 64}, f, ref, "oracle");
    const double ratio = r.rows.back().l2_error / r.rows.front().l2_error;
    const double slope = log_log_fit(r.ns(), r.l2_errors()).slope;
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return {ratio <= 0.1 && slope <= -0.7 && seconds < 120.0,
            "err(4) " + fmt(r.rows.front().l2_error) + ", err(64) " + fmt(r.rows.back().l2_error) + ", ratio " +
                fmt(ratio) + ", slope " + fmt(slope) + ", " + fmt(seconds) + " s"};
}

Outcome free_particle() {
    const Grid& g = default_grid();
    const TangentFamily s = family_heat_gauss(Potential::zero(g), g);
    const WaveFunction f = reference_packet(g);
    const WaveFunction analytic = free_packet_evolution(0.0, 2.0, 1.0, 1.0, 0.5, g);
    const WaveFunction dense = SpectralOracle(oracle_generator(s.generator())).group(1.0, 0.5, f);
    const double oracle_gap = l2_distance(dense, analytic);
    const double err = l2_distance(evolve_schrodinger(s, {1.0, 0.5, 64}, f), analytic);
    return {err <= 1e-2 && oracle_gap <= 1e-8,
            "n=64 error vs closed form " + fmt(err) + " (needs <= 0.01), dense oracle vs closed form " + fmt(oracle_gap)};
}

Outcome formula_equivalence() {
    const auto start = Clock::now();
    const Grid g = make_grid(-8.0, 8.0, 32);
    const TangentFamily s = family_heat_gauss(cosine(g), g);
    const WaveFunction f = gaussian_packet(0.0, 1.0, 1.0, g);
    auto spec = [](FormulaId id) { return PropagationSpec{1.0, 0.5, 2, ScalingSquaring{}, id}; };

    const WaveFunction merged = evolve_schrodinger(s, spec(FormulaId::F1_merged), f);
    const InnerLimit f2 = resolve_inner_limit(s, spec(FormulaId::F2_taylor), f);
    const double d2 = l2_distance(f2.value, merged);
    const double d3 =
        l2_distance(evaluate_formula(s, spec(FormulaId::F3_binomial), f, 30),
                    evaluate_formula(s, spec(FormulaId::F2_taylor), f, 30));
    const double e30 = l2_distance(evaluate_formula(s, spec(FormulaId::F4_euler), f, 30), merged);
    const double e120 = l2_distance(evaluate_formula(s, spec(FormulaId::F4_euler), f, 120), merged);
    const double ratio = e30 / e120;
    double d5 = 0.0, d6 = 0.0;
    for (int k : {5, 17, 30, 40}) {
        const WaveFunction w4 = evaluate_formula(s, spec(FormulaId::F4_euler), f, k);
        const WaveFunction w5 = evaluate_formula(s, spec(FormulaId::F5_euler_binomial), f, k);
        const WaveFunction w6 = evaluate_formula(s, spec(FormulaId::F6_full_binomial), f, k);
        d5 = std::max(d5, l2_distance(w5, w4));
        d6 = std::max(d6, l2_distance(w6, w5));
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool pass = f2.converged && d2 <= 1e-8 && d3 <= 1e-6 && ratio >= 3.0 && ratio <= 5.0 && d5 <= 1e-6 &&
                      d6 <= 1e-6 && seconds < 30.0;
    return {pass, "taylor(k=" + std::to_string(f2.k) + ") vs merged " + fmt(d2) + ", binomial vs taylor " + fmt(d3) +
                      ", euler ratio k=30/120 " + fmt(ratio) + ", euler-binomial vs euler " + fmt(d5) +
                      ", full-binomial vs euler-binomial " + fmt(d6) + ", " + fmt(seconds) + " s"};
}

Outcome tangency() {
    const auto start = Clock::now();
    const Grid& g = default_grid();
    const Potential v = cosine(g);
    struct Case {
        std::string name;
        TangentFamily family;
        WaveFunction state;
        std::vector<double> samples;
    };
    const std::vector<Case> cases = {
        {"heat-gauss/zero", family_heat_gauss(Potential::zero(g), g), gaussian_packet(0.0, 0.0, 1.0, g),
         default_tangency_samples()},
        {"heat-gauss/cosine", family_heat_gauss(v, g), gaussian_packet(0.0, 0.0, 1.0, g), default_tangency_samples()},
        {"polyharmonic2", family_polyharmonic(v, 2, g), gaussian_packet(0.0, 0.0, 2.0, g), geometric_samples(1e-3)},
        {"polyharmonic3", family_polyharmonic(v, 3, g), gaussian_packet(0.0, 0.0, 2.0, g), geometric_samples(1e-3)},
    };
    bool pass = true;
    std::string detail;
    for (const auto& c : cases) {
        const LinearOperatorRep h = oracle_generator(c.family.generator());
        const double slope = measure_tangency(c.family, c.state, h, c.samples).fitted_slope;
        const double slope3 = measure_tangency(three_point_family(c.family), c.state, h, c.samples).fitted_slope;
        pass = pass && slope >= 0.85 && slope <= 1.15 && slope3 >= 1.8;
        detail += c.name + " " + fmt(slope) + " (3-point " + fmt(slope3) + "); ";
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return {pass && seconds < 30.0, detail + fmt(seconds) + " s"};
}

Outcome kernels() {
    double sweep = 0.0;
    for (int n : {2, 3, 4}) {
        const PolyharmonicParams p = make_polyharmonic_params(n);
        for (double t : {0.1, 1.0, 10.0})
            for (double y : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0})
                sweep = std::max(sweep, std::abs(polyharmonic_kernel(t, y, p) - polyharmonic_kernel_quadrature(t, y, n)));
    }
    double mass = 0.0;
    const Grid& narrow = default_grid();
    const Grid wide = make_grid(-40.0, 40.0, 512);
    for (double t : {0.01, 0.1, 1.0, 10.0})
        mass = std::max(mass, std::abs(kernel_mass(kernel_row({KernelKind::gauss, 0}, t, narrow), narrow) - 1.0));
    for (int n : {2, 3, 4})
        for (double t : {0.1, 1.0, 10.0})
            mass = std::max(mass,
                            std::abs(kernel_mass(kernel_row({KernelKind::polyharmonic, n}, t, wide), wide) - 1.0));
    double scaling = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const PolyharmonicParams p = make_polyharmonic_params(n);
        for (double t : {0.01, 0.1, 2.0, 10.0, 300.0})
            for (double y : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) {
                const double s = std::pow(t, -1.0 / (2.0 * n));
                const double lhs = polyharmonic_kernel(t, y, p);
                const double rhs = s * polyharmonic_kernel(1.0, s * y, p);
                if (lhs != 0.0) scaling = std::max(scaling, std::abs(lhs - rhs) / std::abs(lhs));
            }
    }
    return {sweep <= 1e-6 && mass <= 1e-6 && scaling <= 1e-10,
            "closed form vs quadrature " + fmt(sweep) + ", mass deviation " + fmt(mass) + ", scaling law " +
                fmt(scaling)};
}

Outcome heat_chernoff() {
    const Grid& g = default_grid();
    const WaveFunction f = reference_packet(g);
    const TangentFamily s = family_heat_gauss(cosine(g), g);
    const SpectralOracle oracle(oracle_generator(s.generator()));
    const WaveFunction exact = oracle.semigroup(0.5, f);
    const double e4 = l2_distance(evolve_heat(s, 0.5, 4, f), exact);
    const double e64 = l2_distance(evolve_heat(s, 0.5, 64, f), exact);

    const TangentFamily free = family_heat_gauss(Potential::zero(g), g);
    const WaveFunction free_exact = exact_semigroup(oracle_generator(free.generator()), 0.5, f);
    double free_err = 0.0;
    for (int n = 1; n <= 64; ++n) free_err = std::max(free_err, l2_distance(evolve_heat(free, 0.5, n, f), free_exact));
    return {e64 <= 0.25 * e4 && free_err <= 1e-8,
            "err(4) " + fmt(e4) + ", err(64) " + fmt(e64) + ", ratio " + fmt(e64 / e4) + "; V=0 worst over n=1..64 " +
                fmt(free_err)};
}

// --- CLI determinism -------------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.empty() && line.front() != '#') out += line + '\n';
    return out;
}

RunConfig random_config(std::mt19937_64& gen) {
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
    auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
    RunConfig c;
    c.family = integer(0, 1) ? FamilyKind::heat_gauss : FamilyKind::polyharmonic;
    c.order = integer(2, 8);
    switch (integer(0, 3)) {
    case 0: c.potential = {}; break;
    case 1: c.potential = {PotentialTag::cosine, uniform(-3, 3), uniform(0.1, 4)}; break;
    case 2: c.potential = {PotentialTag::sech2, uniform(0, 3), uniform(0.1, 4)}; break;
    default: c.potential = {PotentialTag::gaussian_well, uniform(0, 3), uniform(0.1, 4)}; break;
    }
    const double lo = uniform(-50, 0);
    c.grid = {lo, lo + uniform(1, 60), 2 * integer(4, 512)};
    c.a = integer(0, 1) ? uniform(0.1, 3) : -uniform(0.1, 3);
    c.t = uniform(-2, 2);
    c.n = integer(1, 500);
    c.n_list.clear();
    for (int n = integer(1, 3); n < 2000; n += integer(1, 300)) c.n_list.push_back(n);
    switch (integer(0, 2)) {
    case 0: c.exp_method = Taylor{integer(1, 500), std::pow(10.0, uniform(-16, -6))}; break;
    case 1: c.exp_method = Euler{integer(1, 1 << 22)}; break;
    default: c.exp_method = ScalingSquaring{std::pow(10.0, uniform(-16, -6))}; break;
    }
    c.formula = kAllFormulas[integer(0, 6)];
    c.k = integer(0, 100);
    c.packet = {uniform(-5, 5), uniform(-5, 5), uniform(0.1, 3)};
    c.initial = integer(0, 1) ? "" : "state_" + std::to_string(integer(0, 99)) + ".csv";
    c.reference = integer(0, 1) ? ReferenceKind::oracle : ReferenceKind::analytic;
    c.out = integer(0, 1) ? "" : "out dir/run_" + std::to_string(integer(0, 99)) + ".csv";
    c.three_point = integer(0, 1);
    c.broken = integer(0, 1);
    c.t_samples.clear();
    double t = uniform(1e-3, 1e-1);
    for (int j = 0; j < integer(2, 9); ++j, t *= uniform(0.2, 0.9)) c.t_samples.push_back(t);
    c.kernel = integer(0, 1) ? KernelKind::gauss : KernelKind::polyharmonic;
    c.kernel_mode = integer(0, 1) ? KernelRowMode::sampled : KernelRowMode::periodized;
    return c;
}

Outcome cli_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("qfey_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "grid=-20,20,256\npotential=cosine:1,1\na=1\nt=0.5\nn=16\n"
                                      "packet=0,2,1\n";
    auto run = [&](const std::string& name) {
        const std::string cmd = std::string("\"") + QFEY_CLI_PATH + "\" evolve --config \"" +
                                (dir / "run.cfg").string() + "\" --out \"" + (dir / name).string() + "\" 2>/dev/null";
        return std::system(cmd.c_str());
    };
    const int rc1 = run("first.csv");
    const int rc2 = run("second.csv");
    const std::string first = data_rows(read_file(dir / "first.csv"));
    const std::string second = data_rows(read_file(dir / "second.csv"));
    const bool identical = rc1 == 0 && rc2 == 0 && !first.empty() && first == second;
    std::error_code ec;
    fs::remove_all(dir, ec);

    std::mt19937_64 gen(20240611);
    int round_trips = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const RunConfig c = random_config(gen);
        const std::string text = print_config(c);
        if (parse_config(text) == c && print_config(parse_config(text)) == text) ++round_trips;
    }
    return {identical && round_trips == 20,
            std::string("evolve runs ") + (identical ? "byte-identical" : "differ or failed") + " (" +
                std::to_string(std::count(first.begin(), first.end(), '\n')) + " rows); config round-trips " +
                std::to_string(round_trips) + "/20"};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"unitarity", unitarity},
        {"chernoff convergence", chernoff_convergence},
        {"free-particle analytic check", free_particle},
        {"formula equivalence", formula_equivalence},
        {"tangency", tangency},
        {"kernels", kernels},
        {"heat chernoff", heat_chernoff},
        {"cli determinism", cli_determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << name << "): " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
