// commands.hpp — the curve / critical-angle / sweep / phases / oracle commands
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "zenoscope/analysis.hpp"
#include "zenoscope/config.hpp"
#include "zenoscope/oracle.hpp"
#include "zenoscope/rates.hpp"

#ifndef ZENOSCOPE_VERSION
#define ZENOSCOPE_VERSION "1.0.0"
#endif

namespace zenoscope::commands {

using config::json;
using config::RunConfig;

enum ExitCode { kOk = 0, kInvalidConfig = 2, kNumericalFailure = 3, kNoCrossing = 4 };

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// out.csv + "_G1" -> out_G1.csv
inline std::string with_suffix(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> text_columns;  // leading string-valued columns, if any
    std::vector<std::vector<std::string>> text_rows;
};

inline void write_table(const std::string& path, const std::string& format, const RunConfig& cfg,
                        const std::vector<std::pair<std::string, std::string>>& extra, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParameters("cannot write output file '" + path + "'");
    if (format == "json") {
        json j;
        j["tool"] = {{"name", "zenoscope"}, {"version", ZENOSCOPE_VERSION}};
        j["config"] = config::to_json(cfg);
        for (const auto& [k, v] : extra) j["metadata"][k] = v;
        std::vector<std::string> cols = t.text_columns;
        cols.insert(cols.end(), t.columns.begin(), t.columns.end());
        j["columns"] = cols;
        json rows = json::array();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            json row = json::array();
            if (!t.text_rows.empty())
                for (const auto& s : t.text_rows[r]) row.push_back(s);
            for (double v : t.rows[r]) row.push_back(std::isnan(v) ? json(nullptr) : json(v));
            rows.push_back(row);
        }
        j["rows"] = rows;
        out << j.dump(2) << "\n";
        return;
    }
    out << "# zenoscope " << ZENOSCOPE_VERSION << "\n";
    for (const auto& [k, v] : extra) out << "# " << k << ": " << v << "\n";
    out << "# config: " << config::to_json(cfg).dump() << "\n";
    bool first = true;
    for (const auto& c : t.text_columns) out << (first ? "" : ",") << c, first = false;
    for (const auto& c : t.columns) out << (first ? "" : ",") << c, first = false;
    out << "\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        first = true;
        if (!t.text_rows.empty())
            for (const auto& s : t.text_rows[r]) out << (first ? "" : ",") << s, first = false;
        for (double v : t.rows[r]) out << (first ? "" : ",") << num(v), first = false;
        out << "\n";
    }
}

inline std::string default_output(const RunConfig& c, const char* ext) {
    if (!c.output.empty()) return c.output;
    return (c.preset.empty() ? c.command : c.preset) + ext;
}

inline int cmd_curve(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    if (cfg.model.perturbative_warning()) log << "warning: Delta/eps > 0.2, second-order theory is advisory\n";
    const auto st = state::make_state(cfg.theta, cfg.phi);
    std::vector<double> Gs = cfg.G_list;
    if (Gs.empty()) Gs.push_back(cfg.model.bath.G);
    const std::string base = default_output(cfg, cfg.format == "json" ? ".json" : ".csv");
    std::vector<std::string> modes = cfg.mode == "both" ? std::vector<std::string>{"effective", "modified"}
                                                        : std::vector<std::string>{cfg.mode};
    for (double G : Gs) {
        RunConfig run = cfg;
        if (cfg.model.bath.kind == bath::SpectralDensity::Kind::Continuum) run.model.bath.G = G;
        Table t;
        t.columns.push_back("tau");
        if (modes.size() == 1)
            t.columns.push_back("gamma");
        else
            for (const auto& m : modes) t.columns.push_back("gamma_" + m);
        std::vector<analysis::DecayCurve> curves;
        for (const auto& m : modes) curves.push_back(analysis::sample_curve(st, run.model, config::parse_mode(m), run.grid));
        for (std::size_t i = 0; i < curves[0].tau.size(); ++i) {
            std::vector<double> row{curves[0].tau[i]};
            for (const auto& c : curves) row.push_back(c.gamma[i]);
            t.rows.push_back(row);
        }
        const std::string path = Gs.size() == 1 ? base : with_suffix(base, "_G" + short_num(G));
        write_table(path, cfg.format, run, {{"command", "curve"}, {"series", "G=" + num(G)}}, t);
        log << "wrote " << path << "\n";
    }
    return kOk;
}

inline json peak_json(const analysis::PeakResult& p) {
    return {{"tau_star", p.tau_star}, {"gamma_max", p.gamma_max}, {"refined", p.refined}};
}

inline int cmd_critical_angle(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    const auto mode = config::parse_mode(cfg.mode == "both" ? "effective" : cfg.mode);
    const auto& k = cfg.critical;
    analysis::PeakDifference f(k.G1, k.G2, cfg.model, mode, cfg.grid);
    const std::string report_path = cfg.output.empty() ? (cfg.preset.empty() ? "critical-angle" : cfg.preset) + std::string(".json")
                                                       : cfg.output;
    json report;
    report["tool"] = {{"name", "zenoscope"}, {"version", ZENOSCOPE_VERSION}};
    report["config"] = config::to_json(cfg);
    try {
        auto r = analysis::critical_angle(f, {k.theta_lo, k.theta_hi}, k.tol);
        report["theta_c"] = r.theta_c;
        report["pi_over_theta_c"] = std::numbers::pi / r.theta_c;
        report["bracket"] = {r.theta_lo, r.theta_hi};
        report["residual"] = r.residual;
        report["iterations"] = r.iterations;
        report["G_pair"] = {r.G1, r.G2};
        report["peaks_at_theta_c"] = {{"G1", peak_json(r.peak1)}, {"G2", peak_json(r.peak2)}};
        json around = json::array();
        for (double factor : {0.8, 1.25}) {
            double th = factor * r.theta_c;
            double d = f(th);
            around.push_back({{"theta", th},
                              {"difference", d},
                              {"G1", peak_json(f.last_peak1())},
                              {"G2", peak_json(f.last_peak2())}});
        }
        report["peaks_around_theta_c"] = around;
        log << "theta_c = " << num(r.theta_c) << " (pi/" << short_num(std::numbers::pi / r.theta_c) << ")\n";
    } catch (const NoCrossingError& e) {
        report["error"] = e.what();
        report["difference_at_lo"] = e.f_lo;
        report["difference_at_hi"] = e.f_hi;
        std::ofstream(report_path, std::ios::binary) << report.dump(2) << "\n";
        throw;
    }
    if (!k.table_pi_over_theta.empty()) {
        Table t;
        t.columns = {"pi_over_theta", "theta", "gamma_max_G1", "gamma_max_G2", "difference"};
        for (double x : k.table_pi_over_theta) {
            double th = std::numbers::pi / x;
            double d = f(th);
            t.rows.push_back({x, th, f.last_peak1().gamma_max, f.last_peak2().gamma_max, d});
        }
        const std::string table_path = with_suffix(std::filesystem::path(report_path).replace_extension(".csv").string(), "_table");
        write_table(table_path, "csv", cfg, {{"command", "critical-angle"}, {"series", "peak difference table"}}, t);
        report["table"] = table_path;
        log << "wrote " << table_path << "\n";
    }
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw InvalidParameters("cannot write output file '" + report_path + "'");
    out << report.dump(2) << "\n";
    log << "wrote " << report_path << "\n";
    return kOk;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    auto Gs = cfg.G_list, thetas = cfg.theta_list, phis = cfg.phi_list;
    auto modes = cfg.mode_list;
    if (phis.empty()) phis.push_back(cfg.phi);
    if (modes.empty() && cfg.mode != "both") modes.push_back(cfg.mode);
    if (modes.empty()) modes = {"effective", "modified"};
    if (Gs.empty() || thetas.empty()) throw InvalidParameters("sweep needs non-empty G and theta lists");
    std::sort(Gs.begin(), Gs.end());
    std::sort(thetas.begin(), thetas.end());
    std::sort(phis.begin(), phis.end());
    std::sort(modes.begin(), modes.end());
    for (double th : thetas)
        for (double ph : phis) state::make_state(th, ph);

    struct Cell {
        double G, theta, phi;
        std::string mode;
        std::vector<double> tau, gamma;
        std::string error;
    };
    std::vector<Cell> cells;
    for (double G : Gs)
        for (double th : thetas)
            for (double ph : phis)
                for (const auto& m : modes) cells.push_back({G, th, ph, m, {}, {}, {}});
    const auto taus = cfg.grid.points();
    // cells in parallel, tau points within a cell sequential
    analysis::parallel_for(cells.size(), [&](std::size_t i) {
        Cell& c = cells[i];
        rates::ModelParams p = cfg.model;
        p.bath.G = c.G;
        c.tau = taus;
        c.gamma.assign(taus.size(), std::nan(""));
        try {
            const rates::RateEvaluator eval(state::make_state(c.theta, c.phi), p, config::parse_mode(c.mode));
            for (std::size_t k = 0; k < taus.size(); ++k) c.gamma[k] = eval(taus[k]).gamma;
        } catch (const Error& e) {
            c.error = e.what();
        }
    });
    Table t;
    t.columns = {"G", "theta", "phi"};
    t.text_columns = {};
    // mode is a string column in the middle; keep order G,theta,phi,mode,tau,gamma
    std::size_t failed = 0;
    std::ostringstream body;
    for (const auto& c : cells) {
        if (!c.error.empty()) {
            ++failed;
            log << "warning: cell G=" << short_num(c.G) << " theta=" << short_num(c.theta) << " mode=" << c.mode
                << " failed: " << c.error << "\n";
        }
    }
    const std::string path = default_output(cfg, cfg.format == "json" ? ".json" : ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParameters("cannot write output file '" + path + "'");
    if (cfg.format == "json") {
        json j;
        j["tool"] = {{"name", "zenoscope"}, {"version", ZENOSCOPE_VERSION}};
        j["config"] = config::to_json(cfg);
        j["columns"] = {"G", "theta", "phi", "mode", "tau", "gamma"};
        json rows = json::array();
        for (const auto& c : cells)
            for (std::size_t k = 0; k < c.tau.size(); ++k)
                rows.push_back({c.G, c.theta, c.phi, c.mode, c.tau[k], std::isnan(c.gamma[k]) ? json(nullptr) : json(c.gamma[k])});
        j["rows"] = rows;
        out << j.dump(2) << "\n";
    } else {
        out << "# zenoscope " << ZENOSCOPE_VERSION << "\n# command: sweep\n";
        out << "# config: " << config::to_json(cfg).dump() << "\n";
        out << "G,theta,phi,mode,tau,gamma\n";
        for (const auto& c : cells)
            for (std::size_t k = 0; k < c.tau.size(); ++k)
                out << num(c.G) << "," << num(c.theta) << "," << num(c.phi) << "," << c.mode << "," << num(c.tau[k]) << ","
                    << num(c.gamma[k]) << "\n";
    }
    log << "wrote " << path << "\n";
    if (failed) log << "warning: " << failed << " of " << cells.size() << " cells failed\n";
    return failed == cells.size() ? kNumericalFailure : kOk;
}

inline int cmd_phases(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    const auto& o = cfg.phases;
    if (!(o.t_min > 0.0) || !(o.t_max > o.t_min) || o.count < 2)
        throw InvalidParameters("phases grid needs 0 < t_min < t_max and count >= 2");
    const bath::BathPhases ph(cfg.model.bath, cfg.model.temp, cfg.model.quad);
    const bool dual = o.dual && ph.closed_form();
    std::optional<bath::BathPhases> quad;
    if (dual) quad.emplace(cfg.model.bath, cfg.model.temp, cfg.model.quad, bath::BathPhases::Evaluation::Quadrature);
    Table t;
    t.columns = {"t", "phi_R", "phi_I", "phi_R1", "phi_R2", "abs_C"};
    if (dual) t.columns.insert(t.columns.end(), {"phi_R_quad", "phi_I_quad", "phi_R1_quad", "phi_R2_quad"});
    std::vector<double> ts{0.0};
    for (int i = 0; i < o.count; ++i) ts.push_back(o.t_min * std::pow(o.t_max / o.t_min, double(i) / (o.count - 1)));
    double r2 = std::nan(""), r2q = std::nan("");
    try {
        r2 = ph.phi_R2();
        if (dual) r2q = quad->phi_R2();
    } catch (const DivergenceError& e) {
        log << "warning: " << e.what() << "\n";
    }
    for (double tt : ts) {
        double r1 = std::isnan(r2) ? std::nan("") : ph.phi_R1(tt);
        std::vector<double> row{tt, ph.phi_R(tt), ph.phi_I(tt), r1, r2, std::abs(ph.correlation(tt))};
        if (dual) row.insert(row.end(), {quad->phi_R(tt), quad->phi_I(tt), quad->phi_R1(tt), r2q});
        t.rows.push_back(row);
    }
    const std::string path = default_output(cfg, cfg.format == "json" ? ".json" : ".csv");
    write_table(path, cfg.format, cfg, {{"command", "phases"}}, t);
    log << "wrote " << path << "\n";
    return kOk;
}

// isolated qubit (no bath): |<psi| e^{-i H_S tau} |psi>|^2 with H_S = eps/2 sz + Delta/2 sx
inline double isolated_survival(const state::InitialState& st, double eps, double delta, double tau) {
    const double om = std::hypot(eps, delta);
    if (om == 0.0) return 1.0;
    const double bz = std::cos(st.theta), bx = std::sin(st.theta) * std::cos(st.phi);
    const double proj = (eps * bz + delta * bx) / om;
    const double c = std::cos(0.5 * om * tau), s = std::sin(0.5 * om * tau);
    return c * c + s * s * proj * proj;
}

struct OracleReport {
    std::vector<double> deltas, deviations;
    double exponent = 0.0;
    double identity_residual = 0.0;
    double leakage = 0.0;
    bool flagged = false;
    Table table;
};

inline OracleReport run_oracle(const RunConfig& cfg) {
    const auto& o = cfg.oracle;
    if (o.deltas.size() < 2) throw InvalidParameters("oracle needs at least two Delta values");
    const auto st = state::make_state(o.theta, cfg.phi);
    oracle::DiscreteBathSystem sys;
    if (cfg.model.bath.kind == bath::SpectralDensity::Kind::Discrete) {
        sys = {cfg.model.bath.modes, o.n_max};
    } else {
        auto j = cfg.model.bath;
        j.G = o.G;
        sys = oracle::discretize_spectral_density(j, o.modes, o.n_max, o.cutoff_factor);
    }
    sys.validate();
    OracleReport rep;
    rep.identity_residual = oracle::polaron_identity_residual(sys, cfg.model.eps, o.deltas.front());
    rates::ModelParams p = cfg.model;
    p.bath = sys.spectral_density();
    p.temp = bath::Temperature::zero();
    rep.table.columns = {"delta", "measurement", "s_exact", "s_perturbative", "deviation", "s_isolated_qubit"};
    for (double d : o.deltas) {
        p.delta = d;
        auto ex = oracle::exact_survival(o.tau, o.measurements, st, sys, cfg.model.eps, d);
        rep.leakage = std::max(rep.leakage, ex.leakage);
        rep.flagged = rep.flagged || ex.flagged;
        const double sp = rates::RateEvaluator(st, p, rates::RateMode::Effective)(o.tau).survival;
        for (std::size_t k = 0; k < ex.survival.size(); ++k)
            rep.table.rows.push_back({d, double(k + 1), ex.survival[k], sp, std::abs(ex.survival[k] - sp),
                                      isolated_survival(st, cfg.model.eps, d, o.tau)});
        rep.deltas.push_back(d);
        rep.deviations.push_back(std::abs(ex.survival[0] - sp));
    }
    // least-squares slope of log deviation against log Delta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(rep.deltas.size());
    for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
        double x = std::log(rep.deltas[i]), y = std::log(std::max(rep.deviations[i], 1e-300));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& log = std::cerr) {
    cfg.validate();
    auto rep = run_oracle(cfg);
    const std::string path = default_output(cfg, cfg.format == "json" ? ".json" : ".csv");
    write_table(path, cfg.format, cfg,
                {{"command", "oracle"},
                 {"fitted_delta_exponent", num(rep.exponent)},
                 {"polaron_identity_residual", num(rep.identity_residual)},
                 {"max_top_level_population", num(rep.leakage)}},
                rep.table);
    log << "wrote " << path << "\nfitted exponent " << short_num(rep.exponent) << ", polaron identity residual "
        << short_num(rep.identity_residual) << "\n";
    if (rep.flagged) {
        log << "error: truncation leakage " << short_num(rep.leakage) << " exceeds " << short_num(oracle::ExactSurvival::kLeakageLimit)
            << "\n";
        return kNumericalFailure;
    }
    return kOk;
}

// runs a command and maps failures onto exit codes
inline int dispatch(const RunConfig& cfg, std::ostream& log = std::cerr) {
    try {
        if (cfg.command == "curve") return cmd_curve(cfg, log);
        if (cfg.command == "critical-angle") return cmd_critical_angle(cfg, log);
        if (cfg.command == "sweep") return cmd_sweep(cfg, log);
        if (cfg.command == "phases") return cmd_phases(cfg, log);
        if (cfg.command == "oracle") return cmd_oracle(cfg, log);
        throw InvalidParameters("unknown command '" + cfg.command + "'");
    } catch (const InvalidParameters& e) {
        log << "error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const NoCrossingError& e) {
        log << "error: " << e.what() << "\n";
        return kNoCrossing;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

} // namespace zenoscope::commands
