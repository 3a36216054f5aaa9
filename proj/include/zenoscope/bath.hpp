// bath.hpp — spectral densities and the bath phase functions Phi_R, Phi_I, Phi_R1, Phi_R2
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zenoscope/error.hpp"
#include "zenoscope/quadrature.hpp"

namespace zenoscope::bath {

using cplx = std::complex<double>;

struct Mode {
    double omega = 1.0;
    cplx g{};
};

struct SpectralDensity {
    enum class Kind { Continuum, Discrete };
    Kind kind = Kind::Continuum;
    double G = 1.0;
    double s = 2.0;
    double omega_c = 1.0;
    std::vector<Mode> modes;

    static SpectralDensity continuum(double G, double s = 2.0, double omega_c = 1.0) {
        SpectralDensity j;
        j.G = G;
        j.s = s;
        j.omega_c = omega_c;
        return j;
    }
    static SpectralDensity discrete(std::vector<Mode> modes) {
        SpectralDensity j;
        j.kind = Kind::Discrete;
        j.modes = std::move(modes);
        return j;
    }

    // J(w) = G w^s wc^{1-s} e^{-w/wc}
    double operator()(double w) const {
        return G * std::pow(w, s) * std::pow(omega_c, 1.0 - s) * std::exp(-w / omega_c);
    }

    void validate() const {
        if (kind == Kind::Continuum) {
            if (!(G >= 0.0) || !(omega_c > 0.0) || !(s > 0.0) || !std::isfinite(G) || !std::isfinite(s) ||
                !std::isfinite(omega_c))
                throw InvalidParameters("continuum bath needs G >= 0, omega_c > 0, s > 0");
        } else {
            if (modes.empty()) throw InvalidParameters("discrete bath needs at least one mode");
            for (const auto& m : modes)
                if (!(m.omega > 0.0) || !std::isfinite(m.omega))
                    throw InvalidParameters("discrete bath mode frequencies must be > 0");
        }
    }
};

// beta = +inf encodes zero temperature
struct Temperature {
    double beta = std::numeric_limits<double>::infinity();

    static Temperature zero() { return {}; }
    static Temperature inverse(double b) { return {b}; }
    bool is_zero() const { return std::isinf(beta); }

    void validate() const {
        if (!(beta > 0.0)) throw InvalidParameters("inverse temperature must be > 0");
    }
};

inline double coth_factor(double beta, double w) {
    if (std::isinf(beta)) return 1.0;
    double y = 0.5 * beta * w;
    if (y < 5e-5) return 1.0 / y + y / 3.0;
    return 1.0 / std::tanh(y);
}

// one factor e^{charge chi(time)} of a bath operator string
struct Displacement {
    double charge = 1.0;
    double time = 0.0;
};

class BathPhases {
public:
    enum class Evaluation { Auto, Quadrature };

    BathPhases(SpectralDensity j, Temperature temp, quadrature::QuadratureSpec spec = {},
               Evaluation how = Evaluation::Auto)
        : j_(std::move(j)), temp_(temp), spec_(spec) {
        j_.validate();
        temp_.validate();
        spec_.validate();
        closed_ = how == Evaluation::Auto && j_.kind == SpectralDensity::Kind::Continuum && j_.s == 2.0 &&
                  temp_.is_zero();
        if (j_.kind == SpectralDensity::Kind::Continuum) {
            double need = temp_.is_zero() ? 1.0 : 2.0;
            constant_ok_ = j_.s > need;
        }
        if (constant_ok_) phi_r2_ = compute_r1(0.0);
    }

    const SpectralDensity& spectral_density() const { return j_; }
    const Temperature& temperature() const { return temp_; }
    const quadrature::QuadratureSpec& spec() const { return spec_; }
    bool closed_form() const { return closed_; }

    double phi_R(double t) const {
        t = std::abs(t);
        if (t == 0.0) return 0.0;
        if (closed_) {
            double x = j_.omega_c * t;
            return 4.0 * j_.G * x * x / (1.0 + x * x);
        }
        if (discrete()) {
            double sum = 0.0;
            for (const auto& m : j_.modes) {
                double h = std::sin(0.5 * m.omega * t);
                sum += std::norm(m.g) * 2.0 * h * h * coth_factor(temp_.beta, m.omega) / (m.omega * m.omega);
            }
            return 4.0 * sum;
        }
        const double a = j_.omega_c * t;
        return continuum_integral([a](double x) { double h = std::sin(0.5 * a * x); return 2.0 * h * h; }, true, a);
    }

    double phi_I(double t) const {
        if (t < 0.0) return -phi_I(-t);
        if (t == 0.0) return 0.0;
        if (closed_) {
            const double wc = j_.omega_c;
            return 4.0 * j_.G * t / (wc * (1.0 / (wc * wc) + t * t));
        }
        if (discrete()) {
            double sum = 0.0;
            for (const auto& m : j_.modes) sum += std::norm(m.g) * std::sin(m.omega * t) / (m.omega * m.omega);
            return 4.0 * sum;
        }
        const double a = j_.omega_c * t;
        return continuum_integral([a](double x) { return std::sin(a * x); }, false, a);
    }

    double phi_R1(double t) const {
        t = std::abs(t);
        require_constant("Phi_R1");
        if (closed_) {
            double x = j_.omega_c * t;
            return 4.0 * j_.G / (1.0 + x * x);
        }
        return compute_r1(t);
    }

    double phi_R2() const {
        require_constant("Phi_R2");
        return phi_r2_;
    }

    // Phi_C* = Phi_R + i Phi_I
    cplx phi_c_conj(double t) const { return {phi_R(t), phi_I(t)}; }
    cplx phi_c(double t) const { return std::conj(phi_c_conj(t)); }

    // C(t) = e^{-Phi_C*(t)}
    cplx correlation(double t) const { return std::exp(-phi_c_conj(t)); }

    // <prod_i e^{a_i chi(t_i)}> over the thermal bath state, ordered left to right
    cplx displacement_trace(std::span<const Displacement> ops) const {
        double net = 0.0;
        cplx ex{};
        for (std::size_t i = 0; i < ops.size(); ++i) {
            net += ops[i].charge;
            for (std::size_t k = i + 1; k < ops.size(); ++k)
                if (ops[i].charge != 0.0 && ops[k].charge != 0.0)
                    ex += ops[i].charge * ops[k].charge * phi_c_conj(ops[i].time - ops[k].time);
        }
        if (net != 0.0) ex -= 0.5 * net * net * phi_R2();
        return std::exp(ex);
    }

    // W(t1, t2, tau); Phi_R1 terms folded into Phi_R so the neutral combination never needs Phi_R2
    cplx w_factor(double t1, double t2, double tau) const {
        double re = phi_R(t2 - t1) - phi_R(t2 - tau) - phi_R(t1 - tau) - phi_R(t2) - phi_R(t1) + phi_R(tau);
        double im = phi_I(t2 - t1) - phi_I(t2 - tau) + phi_I(t1 - tau);
        return std::exp(cplx(re, im));
    }

    cplx w_prime_factor(double t1, double t2, double tau) const {
        double re = -phi_R(t2 - t1) + phi_R(t2 - tau) - phi_R(t1 - tau) - phi_R(t2) + phi_R(t1) - phi_R(tau);
        double im = -phi_I(t2 - t1) + phi_I(t2 - tau) - phi_I(t1 - tau);
        return std::exp(cplx(re, im));
    }

private:
    bool discrete() const { return j_.kind == SpectralDensity::Kind::Discrete; }

    void require_constant(const char* what) const {
        if (!constant_ok_) {
            std::string regime = temp_.is_zero() ? "s > 1 at zero temperature" : "s > 2 at finite temperature";
            throw DivergenceError(std::string(what) + " diverges for Ohmicity s = " + std::to_string(j_.s) +
                                  " (requires " + regime + ")");
        }
    }

    double compute_r1(double t) const {
        if (closed_) {
            double x = j_.omega_c * t;
            return 4.0 * j_.G / (1.0 + x * x);
        }
        if (discrete()) {
            double sum = 0.0;
            for (const auto& m : j_.modes)
                sum += std::norm(m.g) * std::cos(m.omega * t) * coth_factor(temp_.beta, m.omega) / (m.omega * m.omega);
            return 4.0 * sum;
        }
        const double a = j_.omega_c * t;
        return continuum_integral([a](double x) { return std::cos(a * x); }, true, a);
    }

    // 4G \int_0^inf x^{s-2} e^{-x} kernel(x) [coth] dx
    template <class K>
    double continuum_integral(K kernel, bool thermal, double frequency) const {
        if (j_.G == 0.0) return 0.0;
        const bool shift = j_.s <= 1.0;
        const double alpha = shift ? j_.s - 1.0 : j_.s - 2.0;
        const double bw = temp_.beta * j_.omega_c;
        auto g = [&](double x) {
            double v = kernel(x);
            if (thermal) v *= coth_factor(bw, x);
            return shift ? v / x : v;
        };
        auto r = quadrature::integrate_laguerre<double>(g, alpha, spec_, frequency);
        return 4.0 * j_.G * r.value;
    }

    SpectralDensity j_;
    Temperature temp_;
    quadrature::QuadratureSpec spec_;
    bool closed_ = false;
    bool constant_ok_ = true;
    double phi_r2_ = 0.0;
};

// Gauss-Legendre discretization of J on (0, cutoff]: |g_k|^2 = w_k J(w_k)
inline SpectralDensity discretize(const SpectralDensity& j, int count, double cutoff) {
    if (j.kind != SpectralDensity::Kind::Continuum) throw InvalidParameters("discretize needs a continuum bath");
    if (count < 1 || !(cutoff > 0.0)) throw InvalidParameters("discretize needs count >= 1 and cutoff > 0");
    const auto& r = quadrature::gauss_legendre(count);
    std::vector<Mode> modes;
    for (int k = 0; k < count; ++k) {
        double w = 0.5 * cutoff * (r.x[k] + 1.0);
        double wk = 0.5 * cutoff * r.w[k];
        modes.push_back({w, cplx(std::sqrt(wk * j(w)), 0.0)});
    }
    return SpectralDensity::discrete(std::move(modes));
}

} // namespace zenoscope::bath
