#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "operators.hpp"
#include "propagator.hpp"

namespace qfey {

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

/// Shortest-safe round-trip formatting (17 significant digits).
inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& text, std::string_view what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument(std::string(what) + ": '" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(value))
        throw InvalidArgument(std::string(what) + ": '" + text + "' is not a finite number");
    return value;
}

inline long parse_integer(const std::string& text, std::string_view what) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument(std::string(what) + ": '" + text + "' is not an integer");
    }
    if (used != text.size()) throw InvalidArgument(std::string(what) + ": '" + text + "' is not an integer");
    return value;
}

inline std::vector<double> parse_reals(const std::string& text, std::string_view what) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_real(trim(part), what));
    return out;
}

inline bool parse_bool(const std::string& text, std::string_view what) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw InvalidArgument(std::string(what) + ": expected true or false, got '" + text + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Potential presets
// ---------------------------------------------------------------------------

enum class PotentialTag { zero, cosine, sech2, gaussian_well };

/// zero | cosine:amp,freq (amp cos(freq x)) | sech2:depth,width (-depth sech^2(x/width))
/// | gaussian-well:depth,width (-depth exp(-x^2/width^2)).
struct PotentialPreset {
    PotentialTag tag = PotentialTag::zero;
    double first = 0.0;
    double second = 0.0;

    bool operator==(const PotentialPreset&) const = default;
};

inline std::string to_string(const PotentialPreset& p) {
    switch (p.tag) {
    case PotentialTag::zero: return "zero";
    case PotentialTag::cosine: return "cosine:" + format_real(p.first) + "," + format_real(p.second);
    case PotentialTag::sech2: return "sech2:" + format_real(p.first) + "," + format_real(p.second);
    case PotentialTag::gaussian_well: return "gaussian-well:" + format_real(p.first) + "," + format_real(p.second);
    }
    return "zero";
}

inline PotentialPreset parse_potential(const std::string& text) {
    if (text == "zero") return {};
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidArgument("potential: expected name:p1,p2, got '" + text + "'");
    const std::string name = text.substr(0, colon);
    const auto params = detail::parse_reals(text.substr(colon + 1), "potential");
    if (params.size() != 2) throw InvalidArgument("potential: '" + name + "' takes two parameters");
    PotentialPreset p{PotentialTag::zero, params[0], params[1]};
    if (name == "cosine") {
        p.tag = PotentialTag::cosine;
    } else if (name == "sech2") {
        p.tag = PotentialTag::sech2;
        detail::require(p.second > 0.0, "potential: sech2 width must be positive");
    } else if (name == "gaussian-well") {
        p.tag = PotentialTag::gaussian_well;
        detail::require(p.second > 0.0, "potential: gaussian-well width must be positive");
    } else {
        throw InvalidArgument("potential: unknown preset '" + name + "'");
    }
    return p;
}

inline Potential make_potential(const PotentialPreset& p, const Grid& grid) {
    switch (p.tag) {
    case PotentialTag::zero: return Potential::zero(grid);
    case PotentialTag::cosine:
        return sample_potential([&](double x) { return p.first * std::cos(p.second * x); }, grid);
    case PotentialTag::sech2:
        return sample_potential(
            [&](double x) {
                const double s = 1.0 / std::cosh(x / p.second);
                return -p.first * s * s;
            },
            grid);
    case PotentialTag::gaussian_well:
        return sample_potential([&](double x) { return -p.first * std::exp(-(x * x) / (p.second * p.second)); },
                                grid);
    }
    return Potential::zero(grid);
}

// ---------------------------------------------------------------------------
// Exp-method text form: taylor[:tol,k_max] | euler[:k] | scaling-squaring[:tol]
// ---------------------------------------------------------------------------

inline std::string to_string(const ExpMethod& method) {
    if (const auto* t = std::get_if<Taylor>(&method))
        return "taylor:" + format_real(t->tol) + "," + std::to_string(t->k_max);
    if (const auto* e = std::get_if<Euler>(&method)) return "euler:" + std::to_string(e->k);
    return "scaling-squaring:" + format_real(std::get<ScalingSquaring>(method).target_tol);
}

inline ExpMethod parse_exp_method(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    ExpMethod method;
    if (name == "taylor") {
        Taylor t;
        if (!args.empty()) {
            const auto parts = detail::split(args, ',');
            if (parts.size() != 2) throw InvalidArgument("exp-method: taylor takes tol,k_max");
            t.tol = detail::parse_real(parts[0], "exp-method");
            t.k_max = static_cast<int>(detail::parse_integer(parts[1], "exp-method"));
        }
        method = t;
    } else if (name == "euler") {
        Euler e;
        if (!args.empty()) e.k = detail::parse_integer(args, "exp-method");
        method = e;
    } else if (name == "scaling-squaring") {
        ScalingSquaring s;
        if (!args.empty()) s.target_tol = detail::parse_real(args, "exp-method");
        method = s;
    } else {
        throw InvalidArgument("exp-method: unknown method '" + name + "'");
    }
    validate(method);
    return method;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class FamilyKind { heat_gauss, polyharmonic };
enum class ReferenceKind { oracle, analytic };

struct GridSpec {
    double x_min = -20.0;
    double x_max = 20.0;
    int m = 256;

    bool operator==(const GridSpec&) const = default;
};

struct PacketSpec {
    double x0 = 0.0;
    double p0 = 0.0;
    double sigma = 1.0;

    bool operator==(const PacketSpec&) const = default;
};

/// Everything a CLI run needs. Text form is one key=value per line; see
/// `print_config` / `parse_config`.
struct RunConfig {
    FamilyKind family = FamilyKind::heat_gauss;
    int order = 2;
    PotentialPreset potential;
    GridSpec grid;
    double a = 1.0;
    double t = 0.5;
    int n = 64;
    std::vector<int> n_list = {1, 2, 4, 8, 16, 32, 64};
    ExpMethod exp_method = ScalingSquaring{};
    FormulaId formula = FormulaId::F1_product;
    int k = 0; // 0: resolve the inner limit automatically
    PacketSpec packet;
    std::string initial; // optional CSV of x,re_psi,im_psi; overrides the packet
    ReferenceKind reference = ReferenceKind::oracle;
    std::string out;
    bool three_point = false;
    bool broken = false; // negative control for tangency runs
    std::vector<double> t_samples = default_tangency_samples();
    KernelKind kernel = KernelKind::gauss;
    KernelRowMode kernel_mode = KernelRowMode::periodized;

    bool operator==(const RunConfig&) const = default;
};

inline constexpr std::array<std::string_view, 20> kConfigKeys = {
    "family",  "N",      "potential", "grid",        "a",      "t",         "n",      "n_list",
    "exp_method", "formula", "k",     "packet",      "initial", "reference", "out",   "three_point",
    "broken",  "t_samples", "kernel", "kernel_mode"};

/// Sets one key from its text value. Keys accept both snake_case and the
/// dashed spelling used by the command-line flags.
inline void apply_setting(RunConfig& c, std::string key, const std::string& raw) {
    for (auto& ch : key)
        if (ch == '-') ch = '_';
    const std::string value = detail::trim(raw);
    if (key == "family") {
        if (value == "heat-gauss") c.family = FamilyKind::heat_gauss;
        else if (value == "polyharmonic") c.family = FamilyKind::polyharmonic;
        else throw InvalidArgument("family: expected heat-gauss or polyharmonic, got '" + value + "'");
    } else if (key == "N") {
        c.order = static_cast<int>(detail::parse_integer(value, "N"));
        make_polyharmonic_params(c.order);
    } else if (key == "potential") {
        c.potential = parse_potential(value);
    } else if (key == "grid") {
        const auto parts = detail::split(value, ',');
        if (parts.size() != 3) throw InvalidArgument("grid: expected min,max,m");
        GridSpec g{detail::parse_real(detail::trim(parts[0]), "grid"), detail::parse_real(detail::trim(parts[1]), "grid"),
                   static_cast<int>(detail::parse_integer(detail::trim(parts[2]), "grid"))};
        make_grid(g.x_min, g.x_max, g.m);
        c.grid = g;
    } else if (key == "a") {
        c.a = detail::parse_real(value, "a");
        detail::require(c.a != 0.0, "a: must be nonzero");
    } else if (key == "t") {
        c.t = detail::parse_real(value, "t");
    } else if (key == "n") {
        const long n = detail::parse_integer(value, "n");
        detail::require(n >= 1 && n <= 1'000'000, "n: must lie in [1, 1e6]");
        c.n = static_cast<int>(n);
    } else if (key == "n_list") {
        std::vector<int> list;
        for (const auto& part : detail::split(value, ',')) {
            const long n = detail::parse_integer(detail::trim(part), "n-list");
            detail::require(n >= 1 && n <= 1'000'000, "n-list: entries must lie in [1, 1e6]");
            detail::require(list.empty() || n > list.back(), "n-list: entries must increase");
            list.push_back(static_cast<int>(n));
        }
        c.n_list = std::move(list);
    } else if (key == "exp_method") {
        c.exp_method = parse_exp_method(value);
    } else if (key == "formula") {
        c.formula = parse_formula_id(value);
    } else if (key == "k") {
        const long k = detail::parse_integer(value, "k");
        detail::require(k >= 0 && k <= 100'000'000, "k: must lie in [0, 1e8]");
        c.k = static_cast<int>(k);
    } else if (key == "packet") {
        const auto p = detail::parse_reals(value, "packet");
        if (p.size() != 3) throw InvalidArgument("packet: expected x0,p0,sigma");
        detail::require(p[2] > 0.0, "packet: sigma must be positive");
        c.packet = {p[0], p[1], p[2]};
    } else if (key == "initial") {
        c.initial = value;
    } else if (key == "reference") {
        if (value == "oracle") c.reference = ReferenceKind::oracle;
        else if (value == "analytic") c.reference = ReferenceKind::analytic;
        else throw InvalidArgument("reference: expected oracle or analytic, got '" + value + "'");
    } else if (key == "out") {
        c.out = value;
    } else if (key == "three_point") {
        c.three_point = detail::parse_bool(value, "three-point");
    } else if (key == "broken") {
        c.broken = detail::parse_bool(value, "broken");
    } else if (key == "t_samples") {
        c.t_samples = detail::parse_reals(value, "t-samples");
    } else if (key == "kernel") {
        if (value == "gauss") c.kernel = KernelKind::gauss;
        else if (value == "polyharmonic") c.kernel = KernelKind::polyharmonic;
        else throw InvalidArgument("kernel: expected gauss or polyharmonic, got '" + value + "'");
    } else if (key == "kernel_mode") {
        if (value == "periodized") c.kernel_mode = KernelRowMode::periodized;
        else if (value == "sampled") c.kernel_mode = KernelRowMode::sampled;
        else throw InvalidArgument("kernel-mode: expected periodized or sampled, got '" + value + "'");
    } else {
        throw InvalidArgument("unknown configuration key '" + key + "'");
    }
}

inline std::string print_config(const RunConfig& c) {
    std::ostringstream os;
    auto join_ints = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    auto join_reals = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
        return s;
    };
    os << "family=" << (c.family == FamilyKind::heat_gauss ? "heat-gauss" : "polyharmonic") << '\n'
       << "N=" << c.order << '\n'
       << "potential=" << to_string(c.potential) << '\n'
       << "grid=" << format_real(c.grid.x_min) << ',' << format_real(c.grid.x_max) << ',' << c.grid.m << '\n'
       << "a=" << format_real(c.a) << '\n'
       << "t=" << format_real(c.t) << '\n'
       << "n=" << c.n << '\n'
       << "n_list=" << join_ints(c.n_list) << '\n'
       << "exp_method=" << to_string(c.exp_method) << '\n'
       << "formula=" << to_string(c.formula) << '\n'
       << "k=" << c.k << '\n'
       << "packet=" << format_real(c.packet.x0) << ',' << format_real(c.packet.p0) << ','
       << format_real(c.packet.sigma) << '\n'
       << "initial=" << c.initial << '\n'
       << "reference=" << (c.reference == ReferenceKind::oracle ? "oracle" : "analytic") << '\n'
       << "out=" << c.out << '\n'
       << "three_point=" << (c.three_point ? "true" : "false") << '\n'
       << "broken=" << (c.broken ? "true" : "false") << '\n'
       << "t_samples=" << join_reals(c.t_samples) << '\n'
       << "kernel=" << (c.kernel == KernelKind::gauss ? "gauss" : "polyharmonic") << '\n'
       << "kernel_mode=" << (c.kernel_mode == KernelRowMode::periodized ? "periodized" : "sampled") << '\n';
    return os.str();
}

/// Parses key=value lines; blank lines and lines starting with '#' are skipped.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
        apply_setting(base, detail::trim(trimmed.substr(0, eq)), trimmed.substr(eq + 1));
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

} // namespace qfey
