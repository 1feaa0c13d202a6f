// qfey: command-line front end for the quasi-Feynman toolkit.
//
//   qfey <evolve|converge|tangency|kernel|compare-formulas> [--config FILE] [--key value ...]
//
// Values from --config are applied first; explicit flags override them.
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qfey/qfey.hpp"

namespace {

std::string flag_name(std::string_view key) {
    std::string name(key);
    for (auto& ch : name)
        if (ch == '_') ch = '-';
    return "--" + name;
}

constexpr const char* kCommands[][2] = {
    {"evolve", "Propagate an initial state; CSV x,re_psi,im_psi,abs_psi"},
    {"converge", "Error against a reference for each n in --n-list"},
    {"tangency", "Residual ||(S(t)f - f)/t - Hf|| for small t and the fitted slope"},
    {"kernel", "Tabulate a kernel on the grid offsets with its discrete mass"},
    {"compare-formulas", "Distance of each expansion formula from the merged product"},
};

const std::map<std::string, std::string> kKeyHelp = {
    {"family", "heat-gauss | polyharmonic"},
    {"N", "polyharmonic order, 2..8"},
    {"potential", "zero | cosine:amp,freq | sech2:depth,width | gaussian-well:depth,width"},
    {"grid", "x_min,x_max,m (m even)"},
    {"a", "coupling in psi_t = i a H psi, nonzero"},
    {"t", "final time (kernel: kernel time)"},
    {"n", "number of Chernoff steps"},
    {"n_list", "comma-separated increasing step counts"},
    {"exp_method", "taylor[:tol,k_max] | euler[:k] | scaling-squaring[:tol]"},
    {"formula", "F1_product | F1_merged | F2_taylor | F3_binomial | F4_euler | F5_euler_binomial | F6_full_binomial"},
    {"k", "inner truncation for F2..F6; 0 resolves it automatically"},
    {"packet", "x0,p0,sigma of the initial Gaussian packet"},
    {"initial", "CSV x,re_psi,im_psi on the grid; overrides --packet"},
    {"reference", "oracle | analytic"},
    {"out", "output CSV path (written atomically); stdout when absent"},
    {"three_point", "use the second-order three-point combination of the family"},
    {"broken", "negative control: shift the family's generator by 1"},
    {"t_samples", "comma-separated decreasing tangency times"},
    {"kernel", "gauss | polyharmonic"},
    {"kernel_mode", "periodized | sampled"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Feynman approximations of Schroedinger and heat evolutions"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::map<std::string, std::string> values;
    std::string config_path;
    for (const auto& [name, description] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "key=value file applied before the flags");
        for (std::string_view key : qfey::kConfigKeys) {
            const std::string k(key);
            if (k == "three_point" || k == "broken") {
                sub->add_flag_callback(flag_name(k), [&values, k] { values[k] = "true"; }, kKeyHelp.at(k));
            } else {
                sub->add_option_function<std::string>(
                    flag_name(k), [&values, k](const std::string& v) { values[k] = v; }, kKeyHelp.at(k));
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "qfey: " << e.what() << '\n';
        return qfey::cli::kUsageError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    qfey::RunConfig config;
    try {
        if (!config_path.empty()) config = qfey::load_config(config_path);
        for (std::string_view key : qfey::kConfigKeys) {
            const auto it = values.find(std::string(key));
            if (it != values.end()) qfey::apply_setting(config, it->first, it->second);
        }
    } catch (const qfey::Error& e) {
        std::cerr << "qfey " << command << ": " << e.what() << '\n';
        return qfey::cli::kUsageError;
    }
    return qfey::cli::run_command(command, config, std::cout, std::cerr);
}
