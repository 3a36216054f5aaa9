// oracle.hpp — truncated-Fock exact dynamics and independent reference computations
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "zenoscope/bath.hpp"
#include "zenoscope/error.hpp"
#include "zenoscope/quadrature.hpp"
#include "zenoscope/state.hpp"

namespace zenoscope::oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct DiscreteBathSystem {
    std::vector<bath::Mode> modes;
    int n_max = 4;

    static constexpr long kMaxDim = 20000;

    long bath_dim() const {
        long d = 1;
        for (std::size_t k = 0; k < modes.size(); ++k) d *= (n_max + 1);
        return d;
    }
    long dim() const { return 2 * bath_dim(); }

    void validate() const {
        if (modes.empty()) throw InvalidParameters("oracle system needs at least one mode");
        if (modes.size() > 6 || n_max < 1 || n_max > 6)
            throw InvalidParameters("oracle system needs M <= 6 modes and 1 <= n_max <= 6");
        if (dim() > kMaxDim) throw InvalidParameters("oracle dimension " + std::to_string(dim()) + " exceeds 20000");
        for (const auto& m : modes)
            if (!(m.omega > 0.0)) throw InvalidParameters("oracle mode frequencies must be > 0");
    }

    bath::SpectralDensity spectral_density() const { return bath::SpectralDensity::discrete(modes); }
};

// Gauss-Legendre modes on (0, 8 omega_c]
inline DiscreteBathSystem discretize_spectral_density(const bath::SpectralDensity& j, int count, int n_max,
                                                      double cutoff_factor = 8.0) {
    return {bath::discretize(j, count, cutoff_factor * j.omega_c).modes, n_max};
}

namespace detail {

inline Mat annihilation(int d) {
    Mat a = Mat::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

// single-mode operator placed at slot k of the bath space
inline Mat embed(const Mat& op, std::size_t k, std::size_t count) {
    const long d = op.rows();
    Mat out = Mat::Identity(1, 1);
    for (std::size_t i = 0; i < count; ++i) out = kron(out, i == k ? op : Mat::Identity(d, d));
    return out;
}

// e^{a X} for anti-Hermitian X through the Hermitian i X
inline Mat exp_anti_hermitian(const Mat& x, double a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cplx(0.0, 1.0) * x);
    Vec ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -a)).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace detail

struct Hamiltonians {
    Mat lab, polaron;
    Mat chi;            // bath space
    Mat exp_chi, exp_minus_chi;
    Mat polaron_unitary;  // e^{chi sigma_z / 2} on the full space
    Mat bath_hamiltonian;
    double reorganization = 0.0;  // sum |g|^2 / w
};

// chi = sum_k (2 g_k^* / w_k) b_k^dag - h.c.; polaron frame H = U H_lab U^dag + sum |g|^2 / w
inline Hamiltonians build_hamiltonians(const DiscreteBathSystem& sys, double eps, double delta) {
    sys.validate();
    const int d = sys.n_max + 1;
    const std::size_t m = sys.modes.size();
    const long nb = sys.bath_dim();
    const Mat a = detail::annihilation(d);
    Mat hb = Mat::Zero(nb, nb), chi = Mat::Zero(nb, nb), couple = Mat::Zero(nb, nb);
    Hamiltonians h;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& md = sys.modes[k];
        const Mat bk = detail::embed(a, k, m);
        const Mat bkd = bk.adjoint();
        hb += md.omega * bkd * bk;
        const cplx mu = 2.0 * std::conj(md.g) / md.omega;
        chi += mu * bkd - std::conj(mu) * bk;
        couple += std::conj(md.g) * bkd + md.g * bk;
        h.reorganization += std::norm(md.g) / md.omega;
    }
    Mat sz(2, 2), sx(2, 2), sp(2, 2), p0(2, 2), p1(2, 2);
    sz << 1, 0, 0, -1;
    sx << 0, 1, 1, 0;
    sp << 0, 1, 0, 0;
    p0 << 1, 0, 0, 0;
    p1 << 0, 0, 0, 1;
    const Mat ib = Mat::Identity(nb, nb);
    const Mat i2 = Mat::Identity(2, 2);
    h.chi = chi;
    h.bath_hamiltonian = hb;
    h.exp_chi = detail::exp_anti_hermitian(chi, 1.0);
    h.exp_minus_chi = detail::exp_anti_hermitian(chi, -1.0);
    h.lab = 0.5 * eps * detail::kron(sz, ib) + 0.5 * delta * detail::kron(sx, ib) + detail::kron(i2, hb) +
            detail::kron(sz, couple);
    h.polaron = 0.5 * eps * detail::kron(sz, ib) + detail::kron(i2, hb) +
                0.5 * delta * (detail::kron(sp, h.exp_chi) + detail::kron(Mat(sp.adjoint()), h.exp_minus_chi));
    h.polaron_unitary = detail::kron(p0, detail::exp_anti_hermitian(chi, 0.5)) +
                        detail::kron(p1, detail::exp_anti_hermitian(chi, -0.5));
    return h;
}

// max-norm of U_P H_lab U_P^dag - (H_polaron - E_reorg) over basis states with every
// mode occupation <= block_level; the truncation edge itself is excluded, since there
// the truncated b no longer satisfies [b, b^dag] = 1
inline double polaron_identity_residual(const DiscreteBathSystem& sys, double eps, double delta, int block_level = 1) {
    const auto h = build_hamiltonians(sys, eps, delta);
    const Mat lhs = h.polaron_unitary * h.lab * h.polaron_unitary.adjoint();
    const Mat diff = lhs - (h.polaron - h.reorganization * Mat::Identity(h.polaron.rows(), h.polaron.cols()));
    const int d = sys.n_max + 1;
    const long nb = sys.bath_dim();
    std::vector<long> keep;
    for (long i = 0; i < sys.dim(); ++i) {
        long b = i % nb;
        bool low = true;
        for (std::size_t k = 0; k < sys.modes.size(); ++k, b /= d) low = low && (b % d) <= block_level;
        if (low) keep.push_back(i);
    }
    double worst = 0.0;
    for (long r : keep)
        for (long c : keep) worst = std::max(worst, std::abs(diff(r, c)));
    return worst;
}

struct ExactSurvival {
    std::vector<double> survival;
    double leakage = 0.0;          // largest top-Fock-level population seen
    double unitarity_error = 0.0;  // ||U^dag U - 1||_max
    bool flagged = false;

    static constexpr double kLeakageLimit = 1e-6;
};

namespace detail {

// population of the top Fock level of any mode
inline double top_level_population(const Vec& psi, const DiscreteBathSystem& sys) {
    const int d = sys.n_max + 1;
    const std::size_t m = sys.modes.size();
    const long nb = sys.bath_dim();
    double worst = 0.0;
    std::vector<double> pop(m, 0.0);
    for (long i = 0; i < psi.size(); ++i) {
        long b = i % nb;
        double p = std::norm(psi[i]);
        for (std::size_t k = m; k-- > 0;) {
            if (b % d == d - 1) pop[k] += p;
            b /= d;
        }
    }
    for (double p : pop) worst = std::max(worst, p);
    return worst;
}

} // namespace detail

// repeated projective measurements of P_psi = U_P (|psi><psi| (x) 1) U_P^dag
inline ExactSurvival exact_survival(double tau, int n_measurements, const state::InitialState& st,
                                    const DiscreteBathSystem& sys, double eps, double delta,
                                    const bath::Temperature& temp = bath::Temperature::zero()) {
    if (!temp.is_zero()) throw InvalidParameters("the exact oracle runs at zero temperature only");
    if (!(tau > 0.0) || n_measurements < 1) throw InvalidParameters("exact_survival needs tau > 0 and >= 1 measurement");
    const auto h = build_hamiltonians(sys, eps, delta);
    const long nb = sys.bath_dim();
    const long dim = sys.dim();

    Vec psi_sys(2);
    psi_sys << st.zeta1, st.zeta2;
    const Mat proj_sys = psi_sys * psi_sys.adjoint();
    const Mat& up = h.polaron_unitary;
    auto project = [&](const Vec& v) -> Vec {
        Vec w = up.adjoint() * v;
        Vec out(dim);
        // (|psi><psi| (x) 1) acting on system blocks
        out.head(nb) = proj_sys(0, 0) * w.head(nb) + proj_sys(0, 1) * w.tail(nb);
        out.tail(nb) = proj_sys(1, 0) * w.head(nb) + proj_sys(1, 1) * w.tail(nb);
        return up * out;
    };

    const auto decomp = state::decompose_projector(st, temp, eps);
    const int branch = decomp.branch_weight[1] > 0.0 ? 1 : 0;
    Vec psi = Vec::Zero(dim);
    psi[branch * nb] = 1.0;  // |n> (x) |vac>
    psi = project(psi);
    double norm = psi.norm();
    if (!(norm > 0.0)) throw InvalidParameters("projected initial state has zero norm");
    psi /= norm;

    Eigen::SelfAdjointEigenSolver<Mat> es(h.polaron);
    const Vec ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp();
    const Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();

    ExactSurvival out;
    out.unitarity_error = detail::max_abs(u.adjoint() * u - Mat::Identity(dim, dim));
    for (int k = 0; k < n_measurements; ++k) {
        psi = u * psi;
        out.leakage = std::max(out.leakage, detail::top_level_population(psi, sys));
        Vec kept = project(psi);
        double s = std::real(psi.dot(kept));
        s = std::clamp(s, 0.0, 1.0);
        out.survival.push_back(s);
        double kn = kept.norm();
        if (!(kn > 0.0)) throw TruncationError("state annihilated by the measurement", out.leakage);
        psi = kept / kn;
    }
    out.flagged = out.leakage > ExactSurvival::kLeakageLimit;
    return out;
}

// vacuum (or thermal) expectation of a displacement string, mode by mode in a truncated Fock space
inline cplx vacuum_trace(std::span<const bath::Displacement> ops, const std::vector<bath::Mode>& modes, int fock_dim) {
    const Mat a = detail::annihilation(fock_dim);
    cplx total{1.0, 0.0};
    for (const auto& md : modes) {
        const cplx mu = 2.0 * std::conj(md.g) / md.omega;
        Vec v = Vec::Zero(fock_dim);
        v[0] = 1.0;
        // apply right to left onto the vacuum ket
        for (std::size_t i = ops.size(); i-- > 0;) {
            const double t = ops[i].time;
            const cplx ph = std::exp(cplx(0.0, md.omega * t));
            const Mat chi_t = mu * ph * a.adjoint() - std::conj(mu * ph) * a;
            v = detail::exp_anti_hermitian(chi_t, ops[i].charge) * v;
        }
        total *= v[0];
    }
    return total;
}

// <e^{-chi(t2)} e^{chi(tau)} e^{-chi(t1)} e^{chi(0)}>, the string whose Bloch value is
// W(t1, t2, tau) e^{-i Phi_I(t2)} e^{-i Phi_I(t1)} e^{i Phi_I(tau)}
inline cplx bath_trace_check(double t1, double t2, double tau, const DiscreteBathSystem& sys, int fock_dim = 0) {
    if (fock_dim <= 0) fock_dim = sys.n_max + 1;
    const bath::Displacement ops[4] = {{-1.0, t2}, {1.0, tau}, {-1.0, t1}, {1.0, 0.0}};
    return vacuum_trace(ops, sys.modes, fock_dim);
}

// <e^{-chi(0)} e^{chi(t2)} e^{-chi(t1)} e^{chi(tau)}> = W'(t1, t2, tau) e^{i Phi_I(t2)} e^{-i Phi_I(t1)} e^{i Phi_I(tau)}
inline cplx bath_trace_check_prime(double t1, double t2, double tau, const DiscreteBathSystem& sys, int fock_dim = 0) {
    if (fock_dim <= 0) fock_dim = sys.n_max + 1;
    const bath::Displacement ops[4] = {{-1.0, 0.0}, {1.0, t2}, {-1.0, t1}, {1.0, tau}};
    return vacuum_trace(ops, sys.modes, fock_dim);
}

// Tr[P_psi e^{-beta H0} P_psi] / Tr_B[e^{-beta H_B}] in the truncated space
inline double projected_thermal_trace(const state::InitialState& st, const DiscreteBathSystem& sys, double eps,
                                      double beta) {
    const auto h = build_hamiltonians(sys, eps, 0.0);
    const long nb = sys.bath_dim();
    Vec psi_sys(2);
    psi_sys << st.zeta1, st.zeta2;
    const Mat proj = h.polaron_unitary * detail::kron(psi_sys * psi_sys.adjoint(), Mat::Identity(nb, nb)) *
                     h.polaron_unitary.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(h.polaron);  // H0 at delta = 0
    const double e0 = es.eigenvalues().minCoeff();
    const Vec boltz = ((es.eigenvalues().array() - e0) * -beta).exp().cast<cplx>();
    const Mat rho = es.eigenvectors() * boltz.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> eb(h.bath_hamiltonian);
    const double zb = ((eb.eigenvalues().array() - eb.eigenvalues().minCoeff()) * -beta).exp().sum();
    // undo the ground-energy shift relative to the bath-only shift
    const double shift = std::exp(-beta * (e0 - eb.eigenvalues().minCoeff()));
    return std::real((proj * rho * proj).trace()) * shift / zb;
}

// adaptive reference integrals, independent of the fixed production rules
struct Domain {
    enum class Kind { Interval, Square, Triangle };
    Kind kind = Kind::Interval;
    double a = 0.0, b = 1.0;  // Interval: [a, b]; Square / Triangle: tau = b

    static Domain interval(double a, double b) { return {Kind::Interval, a, b}; }
    static Domain square(double tau) { return {Kind::Square, 0.0, tau}; }
    static Domain triangle(double tau) { return {Kind::Triangle, 0.0, tau}; }
};

namespace detail {

inline cplx gl_1d(const std::function<cplx(double)>& f, double a, double b, int n) {
    const auto& r = quadrature::gauss_legendre(n);
    cplx s{};
    for (int i = 0; i < n; ++i) s += f(0.5 * (b - a) * (r.x[i] + 1.0) + a) * r.w[i];
    return s * (0.5 * (b - a));
}

inline cplx gl_2d(const std::function<cplx(double, double)>& f, double x0, double x1, double y0, double y1, int n) {
    const auto& r = quadrature::gauss_legendre(n);
    cplx s{};
    for (int i = 0; i < n; ++i) {
        double x = 0.5 * (x1 - x0) * (r.x[i] + 1.0) + x0;
        for (int j = 0; j < n; ++j) s += f(x, 0.5 * (y1 - y0) * (r.x[j] + 1.0) + y0) * (r.w[i] * r.w[j]);
    }
    return s * (0.25 * (x1 - x0) * (y1 - y0));
}

struct Budget {
    int left = 1 << 20;
};

inline cplx refine_1d(const std::function<cplx(double)>& f, double a, double b, double tol, int depth, Budget& bud) {
    cplx lo = gl_1d(f, a, b, 10), hi = gl_1d(f, a, b, 20);
    if (std::abs(hi - lo) <= tol) return hi;
    if (depth > 40 || --bud.left <= 0) throw IntegrationError("refine_quadrature did not converge", std::abs(hi - lo));
    double m = 0.5 * (a + b);
    return refine_1d(f, a, m, 0.5 * tol, depth + 1, bud) + refine_1d(f, m, b, 0.5 * tol, depth + 1, bud);
}

inline cplx refine_2d(const std::function<cplx(double, double)>& f, double x0, double x1, double y0, double y1,
                      double tol, int depth, Budget& bud) {
    cplx lo = gl_2d(f, x0, x1, y0, y1, 8), hi = gl_2d(f, x0, x1, y0, y1, 16);
    if (std::abs(hi - lo) <= tol) return hi;
    if (depth > 20 || --bud.left <= 0) throw IntegrationError("refine_quadrature did not converge", std::abs(hi - lo));
    double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
    double t = 0.25 * tol;
    return refine_2d(f, x0, xm, y0, ym, t, depth + 1, bud) + refine_2d(f, xm, x1, y0, ym, t, depth + 1, bud) +
           refine_2d(f, x0, xm, ym, y1, t, depth + 1, bud) + refine_2d(f, xm, x1, ym, y1, t, depth + 1, bud);
}

} // namespace detail

// target_tol is absolute. For Interval, f2 is ignored; for 2-D domains f1 is ignored.
inline cplx refine_quadrature(const std::function<cplx(double)>& f1, const std::function<cplx(double, double)>& f2,
                              const Domain& dom, double target_tol) {
    detail::Budget bud;
    switch (dom.kind) {
    case Domain::Kind::Interval: return detail::refine_1d(f1, dom.a, dom.b, target_tol, 0, bud);
    case Domain::Kind::Square: return detail::refine_2d(f2, 0.0, dom.b, 0.0, dom.b, target_tol, 0, bud);
    case Domain::Kind::Triangle: {
        // t2 = t1 u over [0, tau] x [0, 1]
        auto g = [&](double t1, double u) { return f2(t1, t1 * u) * t1; };
        return detail::refine_2d(g, 0.0, dom.b, 0.0, 1.0, target_tol, 0, bud);
    }
    }
    return {};
}

inline cplx refine_quadrature(const std::function<cplx(double)>& f, const Domain& dom, double target_tol) {
    return refine_quadrature(f, {}, dom, target_tol);
}

inline cplx refine_quadrature(const std::function<cplx(double, double)>& f, const Domain& dom, double target_tol) {
    return refine_quadrature({}, f, dom, target_tol);
}

} // namespace zenoscope::oracle
