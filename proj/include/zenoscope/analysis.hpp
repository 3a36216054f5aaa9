// analysis.hpp — decay curves, peaks, Zeno / anti-Zeno regimes and the critical angle
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zenoscope/error.hpp"
#include "zenoscope/rates.hpp"

namespace zenoscope::analysis {

using rates::ModelParams;
using rates::RateMode;
using state::InitialState;

// runs body(i) for i in [0, n) on a small pool; each index owns its output slot
template <class F>
void parallel_for(std::size_t n, F&& body, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct TauGrid {
    enum class Spacing { Linear, Log };
    double tau_min = 0.05;
    double tau_max = 5.0;
    int count = 200;
    Spacing spacing = Spacing::Log;

    void validate() const {
        if (count < 2) throw InvalidParameters("tau grid needs at least 2 points");
        if (!(tau_min > 0.0) || !(tau_max > tau_min)) throw InvalidParameters("tau grid needs 0 < tau_min < tau_max");
    }

    std::vector<double> points() const {
        validate();
        std::vector<double> t(count);
        for (int i = 0; i < count; ++i) {
            double f = double(i) / (count - 1);
            t[i] = spacing == Spacing::Linear ? tau_min + f * (tau_max - tau_min)
                                              : tau_min * std::pow(tau_max / tau_min, f);
        }
        t.front() = tau_min;
        t.back() = tau_max;
        return t;
    }
};

struct DecayCurve {
    ModelParams params;
    InitialState state;
    RateMode mode = RateMode::Effective;
    TauGrid grid;
    std::vector<double> tau, gamma;
};

struct PeakResult {
    double tau_star = 0.0;
    double gamma_max = 0.0;
    bool refined = false;
};

struct RegimeInterval {
    enum class Label { Zeno, AntiZeno };
    double tau_lo, tau_hi;
    Label label;
};

struct RegimeSegmentation {
    std::vector<RegimeInterval> intervals;

    bool has_anti_zeno() const {
        return std::any_of(intervals.begin(), intervals.end(),
                           [](const RegimeInterval& r) { return r.label == RegimeInterval::Label::AntiZeno; });
    }
};

inline DecayCurve sample_curve(const InitialState& st, const ModelParams& p, RateMode mode, const TauGrid& grid) {
    DecayCurve c;
    c.params = p;
    c.state = st;
    c.mode = mode;
    c.grid = grid;
    c.tau = grid.points();
    c.gamma.assign(c.tau.size(), 0.0);
    const rates::RateEvaluator eval(st, p, mode);
    parallel_for(c.tau.size(), [&](std::size_t i) {
        try {
            c.gamma[i] = eval(c.tau[i]).gamma;
        } catch (const Error& e) {
            throw Error("rate evaluation failed at tau = " + std::to_string(c.tau[i]) + ": " + e.what());
        }
        if (!std::isfinite(c.gamma[i])) throw Error("non-finite rate at tau = " + std::to_string(c.tau[i]));
    });
    return c;
}

// maximise f on [a, b]
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                            int max_iter = 40, double rel_tol = 1e-9) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > rel_tol * std::abs(a + b); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

inline PeakResult find_peak(const std::vector<double>& tau, const std::vector<double>& gamma,
                            const std::function<double(double)>& evaluator) {
    if (tau.size() < 3 || tau.size() != gamma.size()) throw InvalidParameters("find_peak needs >= 3 samples");
    const std::size_t k = std::size_t(std::max_element(gamma.begin(), gamma.end()) - gamma.begin());
    PeakResult pk{tau[k], gamma[k], false};
    if (k == 0 || k + 1 == tau.size() || !evaluator) return pk;
    auto [t, g] = golden_max(evaluator, tau[k - 1], tau[k + 1]);
    pk.refined = true;
    if (g > pk.gamma_max) {
        pk.tau_star = t;
        pk.gamma_max = g;
    }
    return pk;
}

inline PeakResult find_peak(const DecayCurve& c) {
    const rates::RateEvaluator eval(c.state, c.params, c.mode);
    return find_peak(c.tau, c.gamma, [&](double t) { return eval(t).gamma; });
}

inline RegimeSegmentation classify_regimes(const std::vector<double>& tau, const std::vector<double>& gamma) {
    if (tau.size() < 3 || tau.size() != gamma.size()) throw InvalidParameters("classify_regimes needs >= 3 samples");
    using L = RegimeInterval::Label;
    RegimeSegmentation seg;
    for (std::size_t i = 0; i + 1 < tau.size(); ++i) {
        const double d = gamma[i + 1] - gamma[i];
        L label = d > 0.0 ? L::Zeno : d < 0.0 ? L::AntiZeno : (seg.intervals.empty() ? L::Zeno : seg.intervals.back().label);
        if (!seg.intervals.empty() && seg.intervals.back().label == label)
            seg.intervals.back().tau_hi = tau[i + 1];
        else
            seg.intervals.push_back({tau[i], tau[i + 1], label});
    }
    return seg;
}

inline RegimeSegmentation classify_regimes(const DecayCurve& c) { return classify_regimes(c.tau, c.gamma); }

// peak decay rates of one coupling strength as a function of theta, reusing
// per-tau integral kernels across angles
class PeakTracker {
public:
    PeakTracker(double G, const ModelParams& p, RateMode mode, const TauGrid& grid)
        : p_(p), mode_(mode), tau_(grid.points()) {
        p_.bath.G = G;
        p_.validate();
        phases_.emplace(p_.bath, p_.temp, p_.quad);
        kernels_.resize(tau_.size());
        for (std::size_t i = 0; i < tau_.size(); ++i) {
            kernels_[i].tau = tau_[i];
            kernels_[i].mode = mode_;
        }
    }

    const ModelParams& params() const { return p_; }
    const std::vector<double>& taus() const { return tau_; }

    std::vector<double> curve(double theta, double phi = 0.0) {
        const auto st = state::make_state(theta, phi);
        const auto d = state::decompose_projector(st, p_.temp, p_.eps);
        const double z = state::normalization_Z(d, *phases_);
        const auto need = rates::needed_branches(d);
        parallel_for(tau_.size(), [&](std::size_t i) {
            for (int n = 0; n < 2; ++n)
                if (need[n] && !kernels_[i].has_branch[n])
                    rates::accumulate_branch(kernels_[i], n, *phases_, p_.eps, p_.quad);
        });
        std::vector<double> g(tau_.size());
        for (std::size_t i = 0; i < tau_.size(); ++i)
            g[i] = rates::make_result_from_deficit(tau_[i], rates::kernel_deficit(kernels_[i], st, d, z, p_.delta),
                                                   rates::RateDefinition::LinearInS)
                       .gamma;
        return g;
    }

    PeakResult peak(double theta, double phi = 0.0) {
        const auto g = curve(theta, phi);
        const auto st = state::make_state(theta, phi);
        const auto d = state::decompose_projector(st, p_.temp, p_.eps);
        const double z = state::normalization_Z(d, *phases_);
        auto eval = [&](double t) {
            auto k = rates::make_kernel(t, mode_, *phases_, p_.eps, p_.quad, rates::needed_branches(d));
            return rates::make_result_from_deficit(t, rates::kernel_deficit(k, st, d, z, p_.delta),
                                                   rates::RateDefinition::LinearInS)
                .gamma;
        };
        return find_peak(tau_, g, eval);
    }

private:
    ModelParams p_;
    RateMode mode_;
    std::vector<double> tau_;
    std::optional<rates::BathPhases> phases_;
    std::vector<rates::SurvivalKernel> kernels_;
};

struct CriticalAngleResult {
    double theta_c = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;
    double residual = 0.0;
    double G1 = 1.0, G2 = 3.0;
    PeakResult peak1, peak2;  // at theta_c
    int iterations = 0;
};

// f(theta) = peak(G2) - peak(G1)
class PeakDifference {
public:
    PeakDifference(double G1, double G2, const ModelParams& p, RateMode mode, const TauGrid& grid)
        : G1_(G1), G2_(G2), t1_(G1, p, mode, grid), t2_(G2, p, mode, grid) {}

    double operator()(double theta) {
        last1_ = t1_.peak(theta);
        last2_ = t2_.peak(theta);
        return last2_.gamma_max - last1_.gamma_max;
    }
    const PeakResult& last_peak1() const { return last1_; }
    const PeakResult& last_peak2() const { return last2_; }
    double G1() const { return G1_; }
    double G2() const { return G2_; }

private:
    double G1_, G2_;
    PeakTracker t1_, t2_;
    PeakResult last1_, last2_;
};

// bisection on theta; tol is relative to the peak heights at the current midpoint
inline CriticalAngleResult critical_angle(PeakDifference& f, std::pair<double, double> bracket = {0.0, std::numbers::pi / 2},
                                          double tol = 1e-6) {
    if (!(bracket.first < bracket.second)) throw InvalidParameters("theta bracket must satisfy lo < hi");
    if (bracket.first < 0.0 || bracket.second > std::numbers::pi) throw InvalidParameters("theta bracket must lie in [0, pi]");
    if (!(tol > 0.0)) throw InvalidParameters("critical-angle tolerance must be positive");
    const double G1 = f.G1(), G2 = f.G2();
    double lo = bracket.first, hi = bracket.second;
    double flo = f(lo);
    double fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0) && !(flo > 0.0 && fhi < 0.0))
        throw NoCrossingError("peak difference does not change sign on [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]: f(lo) = " + std::to_string(flo) +
                                  ", f(hi) = " + std::to_string(fhi),
                              flo, fhi);
    CriticalAngleResult res;
    res.G1 = G1;
    res.G2 = G2;
    double mid = 0.5 * (lo + hi), fmid = 0.0;
    while (true) {
        mid = 0.5 * (lo + hi);
        fmid = f(mid);
        ++res.iterations;
        const double scale = std::max(std::abs(f.last_peak1().gamma_max), std::abs(f.last_peak2().gamma_max));
        if (std::abs(fmid) <= tol * scale || hi - lo <= 1e-6) break;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    res.theta_c = mid;
    res.theta_lo = lo;
    res.theta_hi = hi;
    res.residual = fmid;
    res.peak1 = f.last_peak1();
    res.peak2 = f.last_peak2();
    return res;
}

} // namespace zenoscope::analysis
