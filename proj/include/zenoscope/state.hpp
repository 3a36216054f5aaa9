// state.hpp — prepared qubit state, projector decomposition and normalisation
#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "zenoscope/bath.hpp"
#include "zenoscope/error.hpp"

namespace zenoscope::state {

using cplx = std::complex<double>;

// |psi> = zeta1 |0> + zeta2 |1>, |0> the upper level (sigma_z = +1)
struct InitialState {
    double theta = 0.0;
    double phi = 0.0;
    cplx zeta1{1.0, 0.0};
    cplx zeta2{};

    cplx zeta(int i) const { return i == 0 ? zeta1 : zeta2; }
};

inline InitialState make_state(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
        throw InvalidParameters("theta must lie in [0, pi], got " + std::to_string(theta));
    if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi))
        throw InvalidParameters("phi must lie in [0, 2pi), got " + std::to_string(phi));
    InitialState st;
    st.theta = theta;
    st.phi = phi;
    st.zeta1 = {std::cos(0.5 * theta), 0.0};
    st.zeta2 = std::polar(std::sin(0.5 * theta), phi);
    return st;
}

inline int sigma_z(int i) { return i == 0 ? 1 : -1; }

// e^{left chi} e^{-beta H_B} e^{right chi}
struct BathString {
    int left = 0;
    int right = 0;

    std::string to_string() const {
        auto part = [](int c) -> std::string {
            if (c == 0) return "";
            return c > 0 ? "e^{chi}" : "e^{-chi}";
        };
        return part(left) + "e^{-beta H_B}" + part(right);
    }
    bool operator==(const BathString&) const = default;
};

// P_psi e^{-beta H0} P_psi = sum_{n,i,j} C^n_ij |i><j| (x) E^n_ij
struct ProjectorDecomposition {
    std::array<std::array<std::array<cplx, 2>, 2>, 2> amplitude{};      // C^n_ij without the thermal factor
    std::array<std::array<std::array<BathString, 2>, 2>, 2> labels{};
    std::array<double, 2> log_boltzmann{};  // -+ beta eps / 2, meaningful for finite beta
    std::array<double, 2> branch_weight{};  // Boltzmann factors after the max-exponent shift
    bool zero_temperature = false;

    // Table 1 entry; at zero temperature the dominant e^{+beta eps/2} is factored out
    cplx coefficient(int n, int i, int j) const {
        if (zero_temperature) return amplitude[n][i][j] * branch_weight[n];
        return amplitude[n][i][j] * std::exp(log_boltzmann[n]);
    }
};

inline ProjectorDecomposition decompose_projector(const InitialState& st, const bath::Temperature& temp, double eps) {
    temp.validate();
    ProjectorDecomposition d;
    d.zero_temperature = temp.is_zero();
    for (int n = 0; n < 2; ++n) {
        const double pn = std::norm(st.zeta(n));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                d.amplitude[n][i][j] = st.zeta(i) * pn * std::conj(st.zeta(j));
                d.labels[n][i][j] = {(sigma_z(i) - sigma_z(n)) / 2, (sigma_z(n) - sigma_z(j)) / 2};
            }
    }
    // branch n has system energy sigma_z(n) eps / 2
    for (int n = 0; n < 2; ++n) d.log_boltzmann[n] = d.zero_temperature ? 0.0 : -0.5 * temp.beta * eps * sigma_z(n);
    if (d.zero_temperature) {
        // lowest-energy branch with nonzero amplitude
        int lo = eps >= 0.0 ? 1 : 0;
        if (std::norm(st.zeta(lo)) == 0.0) lo = 1 - lo;
        d.branch_weight[lo] = 1.0;
        d.branch_weight[1 - lo] = 0.0;
    } else {
        double m = -std::numeric_limits<double>::infinity();
        for (int n = 0; n < 2; ++n)
            if (std::norm(st.zeta(n)) > 0.0) m = std::max(m, d.log_boltzmann[n]);
        for (int n = 0; n < 2; ++n) d.branch_weight[n] = std::exp(d.log_boltzmann[n] - m);
    }
    return d;
}

// Tr[P_psi e^{-beta H0} P_psi] per unit bath partition function, in shifted branch weights
inline double normalization_Z(const ProjectorDecomposition& d, const bath::BathPhases& phases) {
    double z = 0.0;
    for (int n = 0; n < 2; ++n)
        for (int i = 0; i < 2; ++i) {
            if (d.branch_weight[n] == 0.0 || d.amplitude[n][i][i] == 0.0) continue;
            const auto& e = d.labels[n][i][i];
            // cyclic: Tr[e^{a chi} T e^{b chi}] = <e^{b chi} e^{a chi}>
            bath::Displacement ops[2] = {{double(e.right), 0.0}, {double(e.left), 0.0}};
            cplx tr = phases.displacement_trace(ops);
            z += d.branch_weight[n] * (d.amplitude[n][i][i] * tr).real();
        }
    if (!(z > 0.0) || !std::isfinite(z)) throw InvalidParameters("normalisation Z is not positive and finite");
    return z;
}

} // namespace zenoscope::state
