// rates.hpp — second-order survival probabilities and effective / modified decay rates
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "zenoscope/bath.hpp"
#include "zenoscope/error.hpp"
#include "zenoscope/quadrature.hpp"
#include "zenoscope/state.hpp"

namespace zenoscope::rates {

using cplx = std::complex<double>;
using bath::BathPhases;
using state::InitialState;

struct ModelParams {
    double eps = 1.0;
    double delta = 0.05;
    bath::SpectralDensity bath = bath::SpectralDensity::continuum(1.0);
    bath::Temperature temp = bath::Temperature::zero();
    quadrature::QuadratureSpec quad{};

    void validate() const {
        if (!std::isfinite(eps)) throw InvalidParameters("eps must be finite");
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidParameters("delta must be >= 0");
        bath.validate();
        temp.validate();
        quad.validate();
    }
    // second-order theory is only advisory beyond this
    bool perturbative_warning() const { return eps != 0.0 && delta / std::abs(eps) > 0.2; }
};

enum class RateDefinition { LinearInS, LogOfS };
enum class RateMode { Effective, Modified };

inline const char* to_string(RateMode m) { return m == RateMode::Effective ? "effective" : "modified"; }

struct RateResult {
    double tau = 0.0;
    double survival = 1.0;
    double gamma = 0.0;
    RateDefinition definition = RateDefinition::LinearInS;
    double imag_residual = 0.0;  // |Im s| left over from the complex assembly
};

// from the survival deficit 1 - s, which keeps full precision when s is close to 1
inline RateResult make_result_from_deficit(double tau, cplx deficit, RateDefinition def) {
    RateResult r;
    r.tau = tau;
    r.survival = 1.0 - deficit.real();
    r.definition = def;
    r.imag_residual = std::abs(deficit.imag());
    r.gamma = def == RateDefinition::LinearInS ? deficit.real() / tau : -std::log1p(-deficit.real()) / tau;
    return r;
}

inline RateResult make_result(double tau, cplx s, RateDefinition def) {
    return make_result_from_deficit(tau, 1.0 - s, def);
}

inline double survival_chain(double s_tau, unsigned n) {
    if (!(s_tau > 0.0 && s_tau <= 1.0)) throw InvalidParameters("survival must lie in (0, 1]");
    return std::pow(s_tau, double(n));
}

namespace detail {

enum Label : std::uint8_t { kZero = 0, kTau = 1, kT1 = 2, kT2 = 3, kThermal = 4 };
enum class Domain : std::uint8_t { Point, Line, Square, Triangle };

struct Factor {
    std::int8_t charge;
    std::uint8_t at;
};

// coef * exp(i eps (p0 tau + p1 t1 + p2 t2)) |row><col| (x) bath string
struct Op {
    cplx coef{1.0, 0.0};
    std::array<int, 3> phase{};
    int row = 0, col = 0;
    std::vector<Factor> bath;
    int order = 0;
    int pr = -1, pc = -1, rr = -1, rc = -1, branch = -1;
};
using Ops = std::vector<Op>;

inline int pick(int a, int b) { return a >= 0 ? a : b; }

inline Ops mul(const Ops& x, const Ops& y) {
    Ops out;
    for (const auto& a : x)
        for (const auto& b : y) {
            if (a.col != b.row) continue;
            Op c;
            c.coef = a.coef * b.coef;
            for (int k = 0; k < 3; ++k) c.phase[k] = a.phase[k] + b.phase[k];
            c.row = a.row;
            c.col = b.col;
            c.bath = a.bath;
            c.bath.insert(c.bath.end(), b.bath.begin(), b.bath.end());
            c.order = a.order + b.order;
            c.pr = pick(a.pr, b.pr);
            c.pc = pick(a.pc, b.pc);
            c.rr = pick(a.rr, b.rr);
            c.rc = pick(a.rc, b.rc);
            c.branch = pick(a.branch, b.branch);
            out.push_back(std::move(c));
        }
    return out;
}

inline Ops mul(const Ops& x, const Ops& y, const Ops& z) { return mul(mul(x, y), z); }
inline Ops mul(const Ops& w, const Ops& x, const Ops& y, const Ops& z) { return mul(mul(mul(w, x), y), z); }

inline Ops scale(Ops x, cplx c) {
    for (auto& o : x) o.coef *= c;
    return x;
}

inline Ops join(Ops a, const Ops& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline int sz(int i) { return i == 0 ? 1 : -1; }

// evolved projector; the modified scheme drops the free system phases
inline Ops projector(bool system_phase) {
    Ops p;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Op o;
            o.row = i;
            o.col = j;
            o.pr = i;
            o.pc = j;
            int q = (sz(i) - sz(j)) / 2;
            if (q != 0) {
                o.bath.push_back({std::int8_t(q), kTau});
                if (system_phase) o.phase[0] = q;
            }
            p.push_back(o);
        }
    return p;
}

inline Ops initial_state(int n) {
    Ops r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Op o;
            o.row = i;
            o.col = j;
            o.rr = i;
            o.rc = j;
            o.branch = n;
            int a = (sz(i) - sz(n)) / 2, b = (sz(n) - sz(j)) / 2;
            if (a != 0) o.bath.push_back({std::int8_t(a), kZero});
            o.bath.push_back({0, kThermal});
            if (b != 0) o.bath.push_back({std::int8_t(b), kZero});
            r.push_back(o);
        }
    return r;
}

// (1/2)[sigma+ e^{i eps t} e^{chi(b)} + sigma- e^{-i eps t} e^{-chi(b)}], one power of Delta
inline Ops coupling(Label t, Label b) {
    Ops v(2);
    for (int k = 0; k < 2; ++k) {
        int q = k == 0 ? 1 : -1;
        v[k].coef = 0.5;
        v[k].row = k;
        v[k].col = 1 - k;
        v[k].order = 1;
        v[k].phase[t - 1] = q;
        v[k].bath.push_back({std::int8_t(q), std::uint8_t(b)});
    }
    return v;
}

struct Pair {
    double c;
    std::uint8_t a, b;
};

struct TraceTerm {
    cplx coef;
    std::array<int, 3> phase;
    int order;
    int slot;
    std::vector<Pair> pairs;
};

inline int slot_of(const Op& o) { return o.branch * 16 + o.pr * 8 + o.pc * 4 + o.rr * 2 + o.rc; }

class Expansion {
public:
    // terms[branch][domain]
    std::array<std::array<std::vector<TraceTerm>, 4>, 2> terms;

    explicit Expansion(RateMode mode) {
        const bool modified = mode == RateMode::Modified;
        const Ops P = projector(!modified);
        const cplx I{0.0, 1.0};
        for (int n = 0; n < 2; ++n) {
            const Ops rho = initial_state(n);
            // Dyson pieces of U_I(tau) and of the reverse system evolution
            const Ops A1 = scale(coupling(kT1, kT1), -I), A1d = scale(coupling(kT1, kT1), I);
            const Ops A1s = scale(coupling(kT1, kT1), -I), A1sd = scale(coupling(kT2, kT2), I);
            const Ops A2 = scale(mul(coupling(kT1, kT1), coupling(kT2, kT2)), -1.0);
            const Ops A2d = scale(mul(coupling(kT2, kT2), coupling(kT1, kT1)), -1.0);

            add(n, Domain::Point, mul(P, rho));
            Ops first = join(mul(P, A1, rho), mul(P, rho, A1d));
            Ops square = mul(P, A1s, rho, A1sd);
            Ops tri = join(mul(P, A2, rho), mul(P, rho, A2d));
            if (modified) {
                const Ops B1 = scale(coupling(kT1, kTau), -I), B1d = scale(coupling(kT1, kTau), I);
                first = join(first, join(mul(P, B1d, rho), mul(P, rho, B1)));
                // Y1 rho Y1^dag with Y1 = A1 + B1^dag
                const Ops Y1 = join(A1s, scale(coupling(kT1, kTau), I));
                const Ops Y1d = join(A1sd, scale(coupling(kT2, kTau), -I));
                square = mul(P, Y1, rho, Y1d);
                // B1^dag A1 and its adjoint
                const Ops cross = mul(scale(coupling(kT2, kTau), I), A1s);
                const Ops crossd = mul(scale(coupling(kT1, kT1), I), scale(coupling(kT2, kTau), -I));
                square = join(square, join(mul(P, cross, rho), mul(P, rho, crossd)));
                const Ops B2d = scale(mul(coupling(kT2, kTau), coupling(kT1, kTau)), -1.0);
                const Ops B2 = scale(mul(coupling(kT1, kTau), coupling(kT2, kTau)), -1.0);
                tri = join(tri, join(mul(P, B2d, rho), mul(P, rho, B2)));
            }
            add(n, Domain::Line, first);
            add(n, Domain::Square, square);
            add(n, Domain::Triangle, tri);
        }
    }

private:
    void add(int n, Domain d, const Ops& ops) {
        std::map<std::tuple<int, int, std::array<int, 3>, std::vector<std::tuple<double, int, int>>>, cplx> merged;
        for (const auto& o : ops) {
            if (o.row != o.col) continue;
            // rotate the thermal state to the front: Tr[X T Y] = <Y X>
            std::size_t k = 0;
            while (o.bath[k].at != kThermal) ++k;
            std::vector<Factor> rot(o.bath.begin() + k + 1, o.bath.end());
            rot.insert(rot.end(), o.bath.begin(), o.bath.begin() + k);
            int net = 0;
            for (auto f : rot) net += f.charge;
            if (net != 0) throw std::logic_error("bath trace with nonzero net displacement");
            std::map<std::pair<int, int>, double> acc;
            for (std::size_t i = 0; i < rot.size(); ++i)
                for (std::size_t j = i + 1; j < rot.size(); ++j)
                    if (rot[i].at != rot[j].at) acc[{rot[i].at, rot[j].at}] += double(rot[i].charge) * rot[j].charge;
            std::vector<std::tuple<double, int, int>> key;
            for (auto& [ab, c] : acc)
                if (c != 0.0) key.emplace_back(c, ab.first, ab.second);
            merged[{o.order, slot_of(o), o.phase, key}] += o.coef;
        }
        for (auto& [key, coef] : merged) {
            if (coef == cplx{}) continue;
            TraceTerm t;
            t.coef = coef;
            t.order = std::get<0>(key);
            t.slot = std::get<1>(key);
            t.phase = std::get<2>(key);
            for (auto& [c, a, b] : std::get<3>(key)) t.pairs.push_back({c, std::uint8_t(a), std::uint8_t(b)});
            terms[n][int(d)].push_back(std::move(t));
        }
    }
};

inline const Expansion& expansion(RateMode mode) {
    static const Expansion effective(RateMode::Effective);
    static const Expansion modified(RateMode::Modified);
    return mode == RateMode::Effective ? effective : modified;
}

} // namespace detail

// Delta-free integrals of the survival expansion at one tau, grouped by
// (order, branch, projector entry, state entry); reusable for any (theta, phi, Delta)
struct SurvivalKernel {
    double tau = 0.0;
    RateMode mode = RateMode::Effective;
    std::array<bool, 2> has_branch{};
    std::array<std::array<cplx, 32>, 3> value{};
};

inline void accumulate_branch(SurvivalKernel& k, int n, const BathPhases& phases, double eps,
                              const quadrature::QuadratureSpec& spec) {
    using namespace detail;
    const auto& ex = expansion(k.mode);
    const double tau = k.tau;
    const int n2 = quadrature::guarded_nodes(spec.nodes_2d, eps, tau);
    for (int d = 0; d < 4; ++d) {
        const auto& terms = ex.terms[n][d];
        if (terms.empty()) continue;
        std::vector<quadrature::Node2> nodes;
        switch (Domain(d)) {
        case Domain::Point: nodes = {{0.0, 0.0, 1.0}}; break;
        case Domain::Line: nodes = quadrature::line_rule(tau, n2); break;
        case Domain::Square: nodes = quadrature::square_rule(tau, n2); break;
        case Domain::Triangle: nodes = quadrature::triangle_rule(tau, n2); break;
        }
        bool need[4][4] = {};
        for (const auto& t : terms)
            for (const auto& p : t.pairs) need[std::min(p.a, p.b)][std::max(p.a, p.b)] = true;
        std::array<std::array<cplx, 32>, 3> acc{};
        cplx table[4][4] = {};
        for (const auto& nd : nodes) {
            const double tv[4] = {0.0, tau, nd.t1, nd.t2};
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    if (need[a][b]) {
                        cplx v = phases.phi_c_conj(tv[a] - tv[b]);
                        table[a][b] = v;
                        table[b][a] = std::conj(v);
                    }
            for (const auto& t : terms) {
                cplx e{0.0, eps * (t.phase[0] * tau + t.phase[1] * nd.t1 + t.phase[2] * nd.t2)};
                for (const auto& p : t.pairs) e += p.c * table[p.a][p.b];
                acc[t.order][t.slot] += t.coef * std::exp(e) * nd.w;
            }
        }
        for (int o = 0; o < 3; ++o)
            for (int s = 0; s < 32; ++s) k.value[o][s] += acc[o][s];
    }
    k.has_branch[n] = true;
}

inline SurvivalKernel make_kernel(double tau, RateMode mode, const BathPhases& phases, double eps,
                                  const quadrature::QuadratureSpec& spec, std::array<bool, 2> branches) {
    if (!(tau > 0.0)) throw InvalidParameters("tau must be > 0");
    SurvivalKernel k;
    k.tau = tau;
    k.mode = mode;
    for (int n = 0; n < 2; ++n)
        if (branches[n]) accumulate_branch(k, n, phases, eps, spec);
    return k;
}

// which thermal branches carry weight for a state
inline std::array<bool, 2> needed_branches(const state::ProjectorDecomposition& d) {
    return {d.branch_weight[0] > 0.0, d.branch_weight[1] > 0.0};
}

// 1 - s; the zeroth order enters as (Z - part) so exact cancellations stay exact
inline cplx kernel_deficit(const SurvivalKernel& k, const InitialState& st, const state::ProjectorDecomposition& d,
                           double z, double delta) {
    cplx total{};
    double dp = 1.0;
    for (int o = 0; o < 3; ++o, dp *= delta) {
        cplx part{};
        for (int s = 0; s < 32; ++s) {
            const int n = s / 16, pr = (s / 8) % 2, pc = (s / 4) % 2, rr = (s / 2) % 2, rc = s % 2;
            if (d.branch_weight[n] == 0.0 || k.value[o][s] == cplx{}) continue;
            if (!k.has_branch[n]) throw std::logic_error("survival kernel lacks a required branch");
            part += k.value[o][s] * st.zeta(pr) * std::conj(st.zeta(pc)) * d.amplitude[n][rr][rc] * d.branch_weight[n];
        }
        total += o == 0 ? z - part : -dp * part;
    }
    return total / z;
}

inline cplx kernel_survival(const SurvivalKernel& k, const InitialState& st, const state::ProjectorDecomposition& d,
                            double z, double delta) {
    return 1.0 - kernel_deficit(k, st, d, z, delta);
}

// binds parameters, state and bath once for repeated tau evaluations
class RateEvaluator {
public:
    RateEvaluator(const InitialState& st, const ModelParams& p, RateMode mode,
                  RateDefinition def = RateDefinition::LinearInS)
        : st_(st), p_(p), mode_(mode), def_(def), phases_(p.bath, p.temp, p.quad),
          decomp_(state::decompose_projector(st, p.temp, p.eps)) {
        p.validate();
        z_ = state::normalization_Z(decomp_, phases_);
    }

    RateResult operator()(double tau) const {
        auto k = make_kernel(tau, mode_, phases_, p_.eps, p_.quad, needed_branches(decomp_));
        return make_result_from_deficit(tau, kernel_deficit(k, st_, decomp_, z_, p_.delta), def_);
    }

    const BathPhases& phases() const { return phases_; }
    const ModelParams& params() const { return p_; }
    const InitialState& initial_state() const { return st_; }
    RateMode mode() const { return mode_; }

private:
    InitialState st_;
    ModelParams p_;
    RateMode mode_;
    RateDefinition def_;
    BathPhases phases_;
    state::ProjectorDecomposition decomp_;
    double z_ = 1.0;
};

inline RateResult gamma_general(double tau, const InitialState& st, const ModelParams& p,
                                RateDefinition def = RateDefinition::LinearInS) {
    return RateEvaluator(st, p, RateMode::Effective, def)(tau);
}

inline RateResult gamma_modified(double tau, const InitialState& st, const ModelParams& p,
                                 RateDefinition def = RateDefinition::LinearInS) {
    return RateEvaluator(st, p, RateMode::Modified, def)(tau);
}

// excited state |0>: s = 1 - 2 Re{(Delta^2/4) tri e^{-i eps (t1-t2)} C(t2-t1)}
inline double excited_triangle(double tau, const BathPhases& phases, double eps, const quadrature::QuadratureSpec& spec) {
    const int n = quadrature::guarded_nodes(spec.nodes_2d, eps, tau);
    cplx sum{};
    for (const auto& nd : quadrature::triangle_rule(tau, n))
        sum += std::exp(cplx(0.0, -eps * (nd.t1 - nd.t2)) - phases.phi_c_conj(nd.t2 - nd.t1)) * nd.w;
    return sum.real();
}

inline double deficit_excited(double tau, const ModelParams& p) {
    if (!(tau > 0.0)) throw InvalidParameters("tau must be > 0");
    p.validate();
    if (p.delta == 0.0) return 0.0;
    BathPhases phases(p.bath, p.temp, p.quad);
    return 0.5 * p.delta * p.delta * excited_triangle(tau, phases, p.eps, p.quad);
}

inline double survival_excited(double tau, const ModelParams& p) { return 1.0 - deficit_excited(tau, p); }

inline RateResult gamma_excited(double tau, const ModelParams& p, RateDefinition def = RateDefinition::LinearInS) {
    return make_result_from_deficit(tau, deficit_excited(tau, p), def);
}

// (|0> + |1>)/sqrt 2 at zero temperature, written out term by term
inline RateResult gamma_superposition(double tau, const ModelParams& p, RateDefinition def = RateDefinition::LinearInS) {
    if (!(tau > 0.0)) throw InvalidParameters("tau must be > 0");
    p.validate();
    if (!p.temp.is_zero()) throw InvalidParameters("gamma_superposition is the zero-temperature form");
    const BathPhases ph(p.bath, p.temp, p.quad);
    const double eps = p.eps, D = p.delta;
    const cplx I{0.0, 1.0};
    auto e = [](cplx x) { return std::exp(x); };
    auto PI = [&](double t) { return ph.phi_I(t); };
    auto PCc = [&](double t) { return ph.phi_c_conj(t); };
    const int n = quadrature::guarded_nodes(p.quad.nodes_2d, eps, tau);

    cplx s = 2.0 + 2.0 * (e(I * eps * tau) * e(-ph.phi_c(tau))).real();

    cplx first{};
    for (const auto& nd : quadrature::line_rule(tau, n)) {
        const double t1 = nd.t1;
        cplx f = e(-I * eps * t1 - PCc(t1)) + e(I * eps * t1 - ph.phi_c(t1)) + e(I * eps * (tau - t1) - PCc(t1 - tau)) +
                 e(-I * eps * (tau - t1) - PCc(t1 - tau) - 2.0 * I * PI(tau) + 2.0 * I * PI(t1));
        first += f * nd.w;
    }
    s += 2.0 * (I * (D / 2.0) * first).real();

    cplx tri{};
    for (const auto& nd : quadrature::triangle_rule(tau, n)) {
        const double t1 = nd.t1, t2 = nd.t2;
        const cplx C12 = ph.correlation(t1 - t2);
        const cplx Wp = std::conj(ph.w_prime_factor(t1, t2, tau));
        cplx f = e(I * eps * (t1 - t2) + 2.0 * I * (PI(t1) - PI(t2))) * C12 + e(-I * eps * (t1 - t2)) * C12 +
                 e(I * eps * (tau - t1 + t2) + I * (PI(t2) - PI(t1) + PI(tau))) * Wp +
                 e(-I * eps * (tau - t1 + t2) - I * (PI(t2) - PI(t1) + PI(tau))) * Wp;
        tri += f * nd.w;
    }
    s -= 2.0 * (D * D / 4.0 * tri).real();

    cplx sq{};
    for (const auto& nd : quadrature::square_rule(tau, n)) {
        const double t1 = nd.t1, t2 = nd.t2;
        const cplx C21 = ph.correlation(t2 - t1);
        const cplx W = ph.w_factor(t1, t2, tau);
        cplx f = e(I * eps * (t1 - t2)) * C21 + e(-I * eps * (t1 - t2) + 2.0 * I * (PI(t2) - PI(t1))) * C21 +
                 e(I * eps * (tau - t1 - t2) + I * (PI(tau) - PI(t1) - PI(t2))) * W +
                 e(-I * eps * (tau - t1 - t2) - I * (PI(tau) - PI(t1) - PI(t2))) * W;
        sq += f * nd.w;
    }
    s += D * D / 4.0 * sq;
    return make_result(tau, s / 4.0, def);
}

// Gamma_n - Gamma for |0> at zero temperature:
// (Delta^2 / 2 tau) Re[ tri e^{i eps (t1-t2)} - sq e^{i eps (t1-t2)} e^{-Phi_R(t1) - i Phi_I(t1)} ]
inline double modified_correction_excited(double tau, const ModelParams& p) {
    if (!(tau > 0.0)) throw InvalidParameters("tau must be > 0");
    p.validate();
    const BathPhases ph(p.bath, p.temp, p.quad);
    const int n = quadrature::guarded_nodes(p.quad.nodes_2d, p.eps, tau);
    cplx tri{}, sq{};
    for (const auto& nd : quadrature::triangle_rule(tau, n)) tri += std::exp(cplx(0.0, p.eps * (nd.t1 - nd.t2))) * nd.w;
    for (const auto& nd : quadrature::square_rule(tau, n))
        sq += std::exp(cplx(-ph.phi_R(nd.t1), p.eps * (nd.t1 - nd.t2) - ph.phi_I(nd.t1))) * nd.w;
    return p.delta * p.delta / (2.0 * tau) * (tri - sq).real();
}

} // namespace zenoscope::rates
