// quadrature.hpp — Gauss-Legendre / Gauss-Laguerre rules, adaptive Gauss-Kronrod, 2-D time-domain rules
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "zenoscope/error.hpp"

namespace zenoscope::quadrature {

using cplx = std::complex<double>;

struct QuadratureSpec {
    int nodes_1d = 200;
    int nodes_2d = 128;
    double rel_tol = 1e-8;
    int max_refinements = 6;

    void validate() const {
        if (nodes_1d < 8 || nodes_2d < 8)
            throw InvalidParameters("quadrature node counts must be >= 8");
        if (!(rel_tol > 0.0))
            throw InvalidParameters("quadrature rel_tol must be > 0");
        if (max_refinements < 0)
            throw InvalidParameters("quadrature max_refinements must be >= 0");
    }
};

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    double rounding = 0.0;  // error floor set by cancellation in the sum
};

struct Rule {
    std::vector<double> x, w;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(cplx v) { return std::abs(v); }

inline Rule legendre_newton(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) {
                // one more evaluation at the converged point for the weight
                p1 = 1.0; p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                break;
            }
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

// Golub-Welsch for the generalized Laguerre weight x^alpha e^{-x}, then Newton polish
inline Rule laguerre_golub_welsch(int n, double alpha) {
    Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 1);
    for (int i = 0; i < n; ++i) diag[i] = 2.0 * i + alpha + 1.0;
    for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(i * (i + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(0, n - 1)), Eigen::ComputeEigenvectors);
    const double mu0 = std::tgamma(alpha + 1.0);
    const double lg = std::lgamma(alpha + n) - std::lgamma(double(n));
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int k = 0; k < n; ++k) {
        double x = es.eigenvalues()[k];
        double v0 = es.eigenvectors()(0, k);
        double w = mu0 * v0 * v0;
        for (int it = 0; it < 3; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 + alpha - x) * p2 - (j - 1.0 + alpha) * p3) / j;
            }
            double pp = (n * p1 - (n + alpha) * p2) / x;
            if (!std::isfinite(pp) || !std::isfinite(p1) || pp == 0.0) break;
            double xn = x - p1 / pp;
            if (!(xn > 0.0)) break;
            x = xn;
            if (it == 2 || std::abs(p1 / pp) <= 1e-15 * x) {
                p1 = 1.0; p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0 + alpha - x) * p2 - (j - 1.0 + alpha) * p3) / j;
                }
                pp = (n * p1 - (n + alpha) * p2) / x;
                double wn = -std::exp(lg) / (pp * n * p2);
                if (std::isfinite(wn) && wn > 0.0) w = wn;
                break;
            }
        }
        r.x[k] = x;
        r.w[k] = w;
    }
    return r;
}

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct GkPanel {
    T value;
    double error;
    double mass;  // \int |f|, sets the rounding floor
};

// error estimate scaled as in QUADPACK's qk15
template <class T, class F>
GkPanel<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T fv[15];
    fv[7] = f(c);
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    T k = fv[7] * kWgk[7];
    T g = fv[7] * kWg[3];
    double mass = magnitude(fv[7]) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        k += (fv[j] + fv[14 - j]) * kWgk[j];
        mass += (magnitude(fv[j]) + magnitude(fv[14 - j])) * kWgk[j];
        if (j % 2 == 1) g += (fv[j] + fv[14 - j]) * kWg[j / 2];
    }
    const T mean = k * 0.5;
    double spread = magnitude(fv[7] - mean) * kWgk[7];
    for (int j = 0; j < 7; ++j) spread += (magnitude(fv[j] - mean) + magnitude(fv[14 - j] - mean)) * kWgk[j];
    const double ah = std::abs(h);
    double err = magnitude((k - g) * h);
    spread *= ah;
    mass *= ah;
    if (spread != 0.0 && err != 0.0) err = spread * std::min(1.0, std::pow(200.0 * err / spread, 1.5));
    if (mass > std::numeric_limits<double>::min() / (50.0 * 2.2e-16))
        err = std::max(50.0 * std::numeric_limits<double>::epsilon() * mass, err);
    return {k * h, err, mass};
}

} // namespace detail

// nodes/weights on [-1, 1]; cached per n, built once
inline const Rule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(detail::legendre_newton(n));
    return *slot;
}

// nodes/weights for the weight x^alpha e^{-x} on [0, inf)
inline const Rule& gauss_laguerre(int n, double alpha) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, alpha}];
    if (!slot) slot = std::make_unique<Rule>(detail::laguerre_golub_welsch(n, alpha));
    return *slot;
}

// global adaptive G7K15 on [a, b], starting from `panels` equal pieces
template <class T, class F>
QuadResult<T> adaptive_gk(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                          int panels = 1, int max_intervals = 200000) {
    struct Piece {
        double a, b;
        T value;
        double err, mass;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    std::priority_queue<Piece> heap;
    constexpr double floor_scale = 60.0 * std::numeric_limits<double>::epsilon();
    T total{};
    double err = 0.0, mass = 0.0;
    panels = std::max(1, panels);
    const double step = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        double lo = a + i * step, hi = (i + 1 == panels) ? b : a + (i + 1) * step;
        auto r = detail::gk15<T>(f, lo, hi);
        heap.push({lo, hi, r.value, r.error, r.mass});
        total += r.value;
        err += r.error;
        mass += r.mass;
    }
    int count = panels;
    auto target = [&] { return std::max({abs_tol, rel_tol * detail::magnitude(total),
                                      floor_scale * mass}); };
    while (err > target() && count < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            heap.push(p);
            break;
        }
        auto l = detail::gk15<T>(f, p.a, mid);
        auto r = detail::gk15<T>(f, mid, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.err;
        mass += l.mass + r.mass - p.mass;
        heap.push({p.a, mid, l.value, l.error, l.mass});
        heap.push({mid, p.b, r.value, r.error, r.mass});
        ++count;
    }
    // re-sum to shed accumulated rounding from the running updates
    T sum{};
    double esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().err;
        heap.pop();
    }
    return {sum, esum, floor_scale * mass};
}

// Laguerre error estimates above this trigger the adaptive fallback
inline constexpr double kLaguerreAcceptTol = 1e-10;

// \int_0^inf x^alpha e^{-x} g(x) dx. `frequency` is the largest oscillation rate of g in x
template <class T, class F>
QuadResult<T> integrate_laguerre(F&& g, double alpha, const QuadratureSpec& spec, double frequency = 0.0) {
    spec.validate();
    auto run = [&](int n) {
        const Rule& r = gauss_laguerre(n, alpha);
        T sum{};
        for (int i = 0; i < n; ++i)
            if (r.w[i] > 0.0) sum += g(r.x[i]) * r.w[i];
        return sum;
    };
    const int n = spec.nodes_1d;
    T coarse = run(std::max(8, n / 2));
    T fine = run(n);
    double est = detail::magnitude(fine - coarse);
    if (est <= kLaguerreAcceptTol * detail::magnitude(fine) || est <= 1e-300) return {fine, est};

    const double tol = std::min(spec.rel_tol, kLaguerreAcceptTol);
    const double xmax = 60.0 + 5.0 * std::max(alpha, 0.0);
    const int panels = std::clamp(int(std::ceil(xmax * std::abs(frequency) / (2.0 * std::numbers::pi))) + 1, 1, 100000);
    auto weighted = [&](double x) -> T { return g(x) * (std::pow(x, alpha) * std::exp(-x)); };
    auto res = adaptive_gk<T>(weighted, 0.0, xmax, tol, 0.0, panels, 400000);
    if (!(res.error <= std::max(spec.rel_tol * detail::magnitude(res.value), res.rounding)) && res.error > 1e-300)
        throw IntegrationError("semi-infinite quadrature did not converge (error estimate " +
                                   std::to_string(res.error) + ")",
                               res.error);
    return res;
}

// \int_0^inf f(w) dw for f decaying on the scale `scale`
template <class F>
QuadResult<cplx> integrate_semi_infinite(F&& f, const QuadratureSpec& spec, double scale = 1.0, double frequency = 0.0) {
    auto g = [&](double x) -> cplx {
        double ex = std::exp(x);
        if (!std::isfinite(ex)) return cplx{};
        return cplx(f(scale * x)) * (ex * scale);
    };
    return integrate_laguerre<cplx>(g, 0.0, spec, frequency * scale);
}

// 2-D time-domain rules over [0, tau]
struct Node2 {
    double t1, t2, w;
};

inline std::vector<Node2> square_rule(double tau, int n) {
    const Rule& r = gauss_legendre(n);
    std::vector<Node2> out;
    out.reserve(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.push_back({0.5 * tau * (r.x[i] + 1.0), 0.5 * tau * (r.x[j] + 1.0), 0.25 * tau * tau * r.w[i] * r.w[j]});
    return out;
}

// 0 <= t2 <= t1 <= tau via t2 = t1 u
inline std::vector<Node2> triangle_rule(double tau, int n) {
    const Rule& r = gauss_legendre(n);
    std::vector<Node2> out;
    out.reserve(std::size_t(n) * n);
    for (int i = 0; i < n; ++i) {
        double t1 = 0.5 * tau * (r.x[i] + 1.0);
        double w1 = 0.5 * tau * r.w[i];
        for (int j = 0; j < n; ++j) {
            double u = 0.5 * (r.x[j] + 1.0);
            out.push_back({t1, t1 * u, w1 * t1 * 0.5 * r.w[j]});
        }
    }
    return out;
}

inline std::vector<Node2> line_rule(double tau, int n) {
    const Rule& r = gauss_legendre(n);
    std::vector<Node2> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back({0.5 * tau * (r.x[i] + 1.0), 0.0, 0.5 * tau * r.w[i]});
    return out;
}

// node count per axis keeping >= 10 nodes per period of e^{i eps t} on [0, tau]
inline int guarded_nodes(int n, double eps, double tau) {
    double periods = std::abs(eps) * tau / (2.0 * std::numbers::pi);
    return std::max(n, int(std::ceil(10.0 * periods)));
}

namespace detail {
template <class F>
QuadResult<cplx> integrate_2d(F&& f, double tau, const QuadratureSpec& spec, bool triangle) {
    spec.validate();
    if (!(tau > 0.0)) throw InvalidParameters("integration interval must be > 0");
    auto run = [&](int n) {
        cplx sum{};
        for (const auto& nd : triangle ? triangle_rule(tau, n) : square_rule(tau, n))
            sum += cplx(f(nd.t1, nd.t2)) * nd.w;
        return sum;
    };
    int n = spec.nodes_2d;
    cplx prev = run(n);
    for (int k = 0; k <= spec.max_refinements; ++k) {
        cplx next = run(2 * n);
        double est = std::abs(next - prev);
        if (est <= spec.rel_tol * std::abs(next) || est <= 1e-15 * tau * tau) return {next, est};
        prev = next;
        n *= 2;
    }
    throw IntegrationError("2-D quadrature did not converge", std::abs(prev));
}
} // namespace detail

template <class F>
QuadResult<cplx> integrate_triangle(F&& f, double tau, const QuadratureSpec& spec = {}) {
    return detail::integrate_2d(f, tau, spec, true);
}

template <class F>
QuadResult<cplx> integrate_square(F&& f, double tau, const QuadratureSpec& spec = {}) {
    return detail::integrate_2d(f, tau, spec, false);
}

} // namespace zenoscope::quadrature
