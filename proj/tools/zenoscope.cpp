// zenoscope.cpp — command-line front end
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zenoscope/commands.hpp"

namespace {

using namespace zenoscope;

struct Overrides {
    std::string config_file, preset, save_config;
    std::optional<std::string> output, format, mode, spacing, beta;
    std::optional<double> eps, delta, G, s, omega_c, theta, phi, tau_min, tau_max, rel_tol;
    std::optional<int> count, nodes_1d, nodes_2d;
    std::vector<double> G_list, theta_list, phi_list;
    std::vector<std::string> mode_list;
    std::optional<double> G1, G2, theta_lo, theta_hi, tol;
    std::vector<double> table;
    std::optional<double> t_min, t_max;
    std::optional<int> t_count;
    std::optional<int> modes, n_max, measurements;
    std::optional<double> oracle_G, oracle_tau, oracle_theta, cutoff_factor;
    std::vector<double> deltas;
};

void add_options(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_file, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "figure preset: fig1a fig1b fig2a fig2b fig3 fig5a fig5b fig6");
    sub->add_option("--save-config", o.save_config, "write the resolved config to FILE");
    sub->add_option("-o,--output", o.output, "output path");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--eps", o.eps, "qubit splitting");
    sub->add_option("--delta", o.delta, "tunneling amplitude");
    sub->add_option("--G", o.G, "coupling strength of the continuum bath");
    sub->add_option("--s", o.s, "Ohmicity");
    sub->add_option("--omega-c", o.omega_c, "cutoff frequency");
    sub->add_option("--beta", o.beta, "inverse temperature, or 'zero'");
    sub->add_option("--theta", o.theta, "Bloch polar angle");
    sub->add_option("--phi", o.phi, "Bloch azimuthal angle");
    sub->add_option("--mode", o.mode, "effective, modified or both");
    sub->add_option("--tau-min", o.tau_min);
    sub->add_option("--tau-max", o.tau_max);
    sub->add_option("--count", o.count, "number of tau points");
    sub->add_option("--spacing", o.spacing, "linear or log");
    sub->add_option("--nodes-1d", o.nodes_1d);
    sub->add_option("--nodes-2d", o.nodes_2d);
    sub->add_option("--rel-tol", o.rel_tol);
    sub->add_option("--G-list", o.G_list, "sweep / curve coupling strengths");
    sub->add_option("--theta-list", o.theta_list);
    sub->add_option("--phi-list", o.phi_list);
    sub->add_option("--mode-list", o.mode_list);
    sub->add_option("--G1", o.G1);
    sub->add_option("--G2", o.G2);
    sub->add_option("--theta-lo", o.theta_lo);
    sub->add_option("--theta-hi", o.theta_hi);
    sub->add_option("--tol", o.tol, "critical-angle tolerance");
    sub->add_option("--table", o.table, "pi/theta values for the difference table");
    sub->add_option("--t-min", o.t_min);
    sub->add_option("--t-max", o.t_max);
    sub->add_option("--t-count", o.t_count);
    sub->add_option("--modes", o.modes, "oracle bath modes");
    sub->add_option("--n-max", o.n_max, "oracle Fock truncation");
    sub->add_option("--oracle-G", o.oracle_G);
    sub->add_option("--oracle-tau", o.oracle_tau);
    sub->add_option("--oracle-theta", o.oracle_theta);
    sub->add_option("--cutoff-factor", o.cutoff_factor);
    sub->add_option("--deltas", o.deltas);
    sub->add_option("--measurements", o.measurements);
}

template <class T>
void set(const std::optional<T>& v, T& dst) {
    if (v) dst = *v;
}

config::RunConfig resolve(const std::string& command, const Overrides& o) {
    config::RunConfig c = o.preset.empty() ? config::RunConfig{} : config::preset(o.preset);
    if (!o.config_file.empty()) c = config::load_config(o.config_file, c);
    if (c.command != command) {
        if (!o.preset.empty() && o.config_file.empty())
            throw InvalidParameters("preset '" + o.preset + "' belongs to the " + c.command + " command");
        c.command = command;
    }
    set(o.output, c.output);
    set(o.format, c.format);
    set(o.mode, c.mode);
    set(o.eps, c.model.eps);
    set(o.delta, c.model.delta);
    if (o.G || o.s || o.omega_c) {
        if (c.model.bath.kind != bath::SpectralDensity::Kind::Continuum) c.model.bath = bath::SpectralDensity::continuum(1.0);
        set(o.G, c.model.bath.G);
        set(o.s, c.model.bath.s);
        set(o.omega_c, c.model.bath.omega_c);
        if (o.G && command == "curve") c.G_list.clear();
    }
    if (o.beta) {
        if (*o.beta == "zero" || *o.beta == "inf")
            c.model.temp = bath::Temperature::zero();
        else
            try {
                c.model.temp = bath::Temperature::inverse(std::stod(*o.beta));
            } catch (const std::logic_error&) {
                throw InvalidParameters("--beta must be a number or 'zero'");
            }
    }
    set(o.theta, c.theta);
    set(o.phi, c.phi);
    set(o.tau_min, c.grid.tau_min);
    set(o.tau_max, c.grid.tau_max);
    set(o.count, c.grid.count);
    if (o.spacing) {
        if (*o.spacing != "linear" && *o.spacing != "log") throw InvalidParameters("--spacing must be linear or log");
        c.grid.spacing = *o.spacing == "log" ? analysis::TauGrid::Spacing::Log : analysis::TauGrid::Spacing::Linear;
    }
    set(o.nodes_1d, c.model.quad.nodes_1d);
    set(o.nodes_2d, c.model.quad.nodes_2d);
    set(o.rel_tol, c.model.quad.rel_tol);
    if (!o.G_list.empty()) c.G_list = o.G_list;
    if (!o.theta_list.empty()) c.theta_list = o.theta_list;
    if (!o.phi_list.empty()) c.phi_list = o.phi_list;
    if (!o.mode_list.empty()) c.mode_list = o.mode_list;
    set(o.G1, c.critical.G1);
    set(o.G2, c.critical.G2);
    set(o.theta_lo, c.critical.theta_lo);
    set(o.theta_hi, c.critical.theta_hi);
    set(o.tol, c.critical.tol);
    if (!o.table.empty()) c.critical.table_pi_over_theta = o.table;
    set(o.t_min, c.phases.t_min);
    set(o.t_max, c.phases.t_max);
    set(o.t_count, c.phases.count);
    set(o.modes, c.oracle.modes);
    set(o.n_max, c.oracle.n_max);
    set(o.measurements, c.oracle.measurements);
    set(o.oracle_G, c.oracle.G);
    set(o.oracle_tau, c.oracle.tau);
    set(o.oracle_theta, c.oracle.theta);
    set(o.cutoff_factor, c.oracle.cutoff_factor);
    if (!o.deltas.empty()) c.oracle.deltas = o.deltas;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zeno and anti-Zeno decay rates of a qubit in a strongly coupled spin-boson bath"};
    app.set_version_flag("--version", std::string("zenoscope ") + ZENOSCOPE_VERSION);
    app.require_subcommand(1);
    Overrides o;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"curve", "decay rate against measurement interval"},
        {"critical-angle", "angle where the peak rates of two couplings coincide"},
        {"sweep", "long-format sweep over G, theta, phi and mode"},
        {"phases", "bath phase functions on a time grid"},
        {"oracle", "exact truncated-bath survival against perturbation theory"}};
    for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), o);
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return commands::kInvalidConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    config::RunConfig cfg;
    try {
        cfg = resolve(command, o);
        if (!o.save_config.empty()) config::save_config(cfg, o.save_config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return commands::kInvalidConfig;
    }
    return commands::dispatch(cfg);
}
