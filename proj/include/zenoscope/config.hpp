// config.hpp — run configuration, JSON round trip and the figure presets
#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zenoscope/analysis.hpp"
#include "zenoscope/error.hpp"
#include "zenoscope/rates.hpp"

namespace zenoscope::config {

using json = nlohmann::ordered_json;

struct CriticalAngleOptions {
    double G1 = 1.0, G2 = 3.0;
    double theta_lo = 0.0, theta_hi = std::numbers::pi / 2;
    double tol = 1e-6;
    std::vector<double> table_pi_over_theta;  // rows of the difference-vs-pi/theta table
};

struct PhasesOptions {
    double t_min = 1e-3, t_max = 1e3;
    int count = 50;
    bool dual = true;  // add quadrature columns when a closed form exists
};

struct OracleOptions {
    int modes = 3;
    int n_max = 4;
    double G = 0.005;
    double cutoff_factor = 8.0;
    double tau = 1.5;
    double theta = std::numbers::pi / 3;
    std::vector<double> deltas{0.05, 0.025, 0.0125};
    int measurements = 3;
};

struct RunConfig {
    std::string command = "curve";
    std::string preset;
    rates::ModelParams model;
    double theta = 0.0, phi = 0.0;
    std::string mode = "effective";  // effective | modified | both
    analysis::TauGrid grid;
    std::string output;
    std::string format = "csv";
    std::vector<double> G_list, theta_list, phi_list;
    std::vector<std::string> mode_list;
    CriticalAngleOptions critical;
    PhasesOptions phases;
    OracleOptions oracle;

    void validate() const {
        model.validate();
        grid.validate();
        if (format != "csv" && format != "json") throw InvalidParameters("format must be csv or json");
        if (mode != "effective" && mode != "modified" && mode != "both")
            throw InvalidParameters("mode must be effective, modified or both");
        for (const auto& m : mode_list)
            if (m != "effective" && m != "modified") throw InvalidParameters("sweep modes must be effective or modified");
        state::make_state(theta, phi);
    }
};

inline rates::RateMode parse_mode(const std::string& m) {
    if (m == "effective") return rates::RateMode::Effective;
    if (m == "modified") return rates::RateMode::Modified;
    throw InvalidParameters("unknown mode '" + m + "'");
}

inline json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["preset"] = c.preset;
    const auto& b = c.model.bath;
    json bath;
    if (b.kind == bath::SpectralDensity::Kind::Continuum) {
        bath = {{"kind", "continuum"}, {"G", b.G}, {"s", b.s}, {"omega_c", b.omega_c}};
    } else {
        json modes = json::array();
        for (const auto& m : b.modes) modes.push_back({m.omega, m.g.real(), m.g.imag()});
        bath = {{"kind", "discrete"}, {"modes", modes}};
    }
    j["model"] = {{"eps", c.model.eps},
                  {"delta", c.model.delta},
                  {"bath", bath},
                  {"beta", c.model.temp.is_zero() ? json("zero") : json(c.model.temp.beta)}};
    j["quadrature"] = {{"nodes_1d", c.model.quad.nodes_1d},
                       {"nodes_2d", c.model.quad.nodes_2d},
                       {"rel_tol", c.model.quad.rel_tol},
                       {"max_refinements", c.model.quad.max_refinements}};
    j["state"] = {{"theta", c.theta}, {"phi", c.phi}};
    j["mode"] = c.mode;
    j["grid"] = {{"tau_min", c.grid.tau_min},
                 {"tau_max", c.grid.tau_max},
                 {"count", c.grid.count},
                 {"spacing", c.grid.spacing == analysis::TauGrid::Spacing::Log ? "log" : "linear"}};
    j["output"] = {{"path", c.output}, {"format", c.format}};
    j["sweep"] = {{"G", c.G_list}, {"theta", c.theta_list}, {"phi", c.phi_list}, {"mode", c.mode_list}};
    j["critical_angle"] = {{"G1", c.critical.G1},
                           {"G2", c.critical.G2},
                           {"theta_lo", c.critical.theta_lo},
                           {"theta_hi", c.critical.theta_hi},
                           {"tol", c.critical.tol},
                           {"table_pi_over_theta", c.critical.table_pi_over_theta}};
    j["phases"] = {{"t_min", c.phases.t_min}, {"t_max", c.phases.t_max}, {"count", c.phases.count}, {"dual", c.phases.dual}};
    j["oracle"] = {{"modes", c.oracle.modes},
                   {"n_max", c.oracle.n_max},
                   {"G", c.oracle.G},
                   {"cutoff_factor", c.oracle.cutoff_factor},
                   {"tau", c.oracle.tau},
                   {"theta", c.oracle.theta},
                   {"deltas", c.oracle.deltas},
                   {"measurements", c.oracle.measurements}};
    return j;
}

namespace detail {
template <class T>
void get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}
} // namespace detail

// missing keys keep their defaults
inline RunConfig from_json(const json& j, RunConfig c = {}) {
    using detail::get;
    try {
        get(j, "command", c.command);
        get(j, "preset", c.preset);
        if (j.contains("model")) {
            const auto& m = j.at("model");
            get(m, "eps", c.model.eps);
            get(m, "delta", c.model.delta);
            if (m.contains("beta")) {
                const auto& b = m.at("beta");
                c.model.temp = b.is_string() ? (b.get<std::string>() == "zero" ? bath::Temperature::zero()
                                                                                : throw InvalidParameters("beta must be a number or \"zero\""))
                                             : bath::Temperature::inverse(b.get<double>());
            }
            if (m.contains("bath")) {
                const auto& b = m.at("bath");
                std::string kind = b.value("kind", "continuum");
                if (kind == "continuum") {
                    c.model.bath.kind = bath::SpectralDensity::Kind::Continuum;
                    get(b, "G", c.model.bath.G);
                    get(b, "s", c.model.bath.s);
                    get(b, "omega_c", c.model.bath.omega_c);
                } else if (kind == "discrete") {
                    std::vector<bath::Mode> modes;
                    for (const auto& e : b.at("modes")) {
                        if (!e.is_array() || e.size() < 2) throw InvalidParameters("discrete modes are [omega, re g, im g]");
                        modes.push_back({e[0].get<double>(), {e[1].get<double>(), e.size() > 2 ? e[2].get<double>() : 0.0}});
                    }
                    c.model.bath = bath::SpectralDensity::discrete(std::move(modes));
                } else {
                    throw InvalidParameters("bath kind must be continuum or discrete");
                }
            }
        }
        if (j.contains("quadrature")) {
            const auto& q = j.at("quadrature");
            get(q, "nodes_1d", c.model.quad.nodes_1d);
            get(q, "nodes_2d", c.model.quad.nodes_2d);
            get(q, "rel_tol", c.model.quad.rel_tol);
            get(q, "max_refinements", c.model.quad.max_refinements);
        }
        if (j.contains("state")) {
            get(j.at("state"), "theta", c.theta);
            get(j.at("state"), "phi", c.phi);
        }
        get(j, "mode", c.mode);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            get(g, "tau_min", c.grid.tau_min);
            get(g, "tau_max", c.grid.tau_max);
            get(g, "count", c.grid.count);
            if (g.contains("spacing")) {
                auto s = g.at("spacing").get<std::string>();
                if (s != "log" && s != "linear") throw InvalidParameters("grid spacing must be log or linear");
                c.grid.spacing = s == "log" ? analysis::TauGrid::Spacing::Log : analysis::TauGrid::Spacing::Linear;
            }
        }
        if (j.contains("output")) {
            get(j.at("output"), "path", c.output);
            get(j.at("output"), "format", c.format);
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            get(s, "G", c.G_list);
            get(s, "theta", c.theta_list);
            get(s, "phi", c.phi_list);
            get(s, "mode", c.mode_list);
        }
        if (j.contains("critical_angle")) {
            const auto& k = j.at("critical_angle");
            get(k, "G1", c.critical.G1);
            get(k, "G2", c.critical.G2);
            get(k, "theta_lo", c.critical.theta_lo);
            get(k, "theta_hi", c.critical.theta_hi);
            get(k, "tol", c.critical.tol);
            get(k, "table_pi_over_theta", c.critical.table_pi_over_theta);
        }
        if (j.contains("phases")) {
            const auto& p = j.at("phases");
            get(p, "t_min", c.phases.t_min);
            get(p, "t_max", c.phases.t_max);
            get(p, "count", c.phases.count);
            get(p, "dual", c.phases.dual);
        }
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            get(o, "modes", c.oracle.modes);
            get(o, "n_max", c.oracle.n_max);
            get(o, "G", c.oracle.G);
            get(o, "cutoff_factor", c.oracle.cutoff_factor);
            get(o, "tau", c.oracle.tau);
            get(o, "theta", c.oracle.theta);
            get(o, "deltas", c.oracle.deltas);
            get(o, "measurements", c.oracle.measurements);
        }
    } catch (const json::exception& e) {
        throw InvalidParameters(std::string("malformed config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidParameters("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidParameters("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j, std::move(base));
}

inline void save_config(const RunConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidParameters("cannot write config file '" + path + "'");
    out << to_json(c).dump(2) << "\n";
}

inline std::vector<std::string> preset_names() {
    return {"fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig5a", "fig5b", "fig6"};
}

// eps = omega_c = 1, Delta = 0.05, s = 2, zero temperature throughout
inline RunConfig preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    c.model.eps = 1.0;
    c.model.delta = 0.05;
    c.model.bath = bath::SpectralDensity::continuum(1.0, 2.0, 1.0);
    c.model.temp = bath::Temperature::zero();
    c.grid = {0.025, 5.0, 200, analysis::TauGrid::Spacing::Linear};
    const double pi = std::numbers::pi;
    if (name == "fig1a" || name == "fig1b" || name == "fig5a" || name == "fig5b") {
        c.command = "curve";
        c.G_list = {1.0, 2.0, 3.0};
        c.theta = (name == "fig1a" || name == "fig5a") ? 0.0 : pi / 2;
        c.mode = name[3] == '1' ? "effective" : "modified";
    } else if (name == "fig2a" || name == "fig2b") {
        c.command = "sweep";
        c.G_list = {1.0};
        c.theta_list = {0.0, pi / 8, pi / 4, pi / 2};
        c.phi_list = {0.0};
        c.mode_list = {name == "fig2a" ? "effective" : "modified"};
    } else if (name == "fig3" || name == "fig6") {
        c.command = "critical-angle";
        c.mode = name == "fig3" ? "effective" : "modified";
        c.grid = {0.05, 5.0, 200, analysis::TauGrid::Spacing::Log};
        c.critical.G1 = 1.0;
        c.critical.G2 = 3.0;
        for (double x = 100.0; x <= 300.0 + 1e-9; x += 20.0) c.critical.table_pi_over_theta.push_back(x);
    } else {
        throw InvalidParameters("unknown preset '" + name + "'");
    }
    c.output = name + (c.command == "critical-angle" ? ".json" : ".csv");
    return c;
}

} // namespace zenoscope::config
