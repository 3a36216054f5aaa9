// test_oracle.cpp — truncated-Fock exact dynamics and reference integrals
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "zenoscope/commands.hpp"
#include "zenoscope/oracle.hpp"
#include "zenoscope/rates.hpp"

using namespace zenoscope;
using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {
oracle::DiscreteBathSystem small_system(int n_max, unsigned seed = 11) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> w(0.5, 2.0), g(0.01, 0.03), ph(0.0, 2 * pi);
    oracle::DiscreteBathSystem sys;
    sys.n_max = n_max;
    for (int k = 0; k < 2; ++k) sys.modes.push_back({w(rng), std::polar(g(rng), ph(rng))});
    return sys;
}
} // namespace

TEST(Hamiltonians, UncoupledSpectrum) {
    oracle::DiscreteBathSystem sys{{{0.7, 0.0}, {1.9, 0.0}}, 3};
    auto h = oracle::build_hamiltonians(sys, 1.0, 0.0);
    for (const auto* m : {&h.lab, &h.polaron}) {
        EXPECT_LE(oracle::detail::max_abs(*m - oracle::Mat(m->diagonal().asDiagonal())), 1e-15);
        std::vector<double> got, want;
        for (long i = 0; i < m->rows(); ++i) got.push_back((*m)(i, i).real());
        for (int s : {1, -1})
            for (int a = 0; a <= 3; ++a)
                for (int b = 0; b <= 3; ++b) want.push_back(0.5 * s + 0.7 * a + 1.9 * b);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-13);
    }
}

TEST(Hamiltonians, Hermitian) {
    auto h = oracle::build_hamiltonians(small_system(3), 1.0, 0.05);
    EXPECT_LE(oracle::detail::max_abs(h.lab - h.lab.adjoint()), 1e-13);
    EXPECT_LE(oracle::detail::max_abs(h.polaron - h.polaron.adjoint()), 1e-13);
}

TEST(PolaronIdentity, SmallResidual) {
    EXPECT_LE(oracle::polaron_identity_residual(small_system(3), 1.0, 0.05), 1e-8);
    EXPECT_LE(oracle::polaron_identity_residual(small_system(4), 1.0, 0.05), 1e-8);
}

TEST(PolaronIdentity, DecreasesWithTruncation) {
    double prev = 1e300;
    for (int n : {2, 3, 4}) {
        double r = oracle::polaron_identity_residual(small_system(n), 1.0, 0.05);
        EXPECT_LT(r, prev) << n;
        prev = r;
    }
}

TEST(ExactSurvival, ExcitedStateWithoutTunnelingSurvives) {
    auto ex = oracle::exact_survival(1.3, 4, state::make_state(0, 0), small_system(3), 1.0, 0.0);
    for (double s : ex.survival) EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_LE(ex.unitarity_error, 1e-10);
}

TEST(ExactSurvival, IsolatedQubitRabi) {
    oracle::DiscreteBathSystem sys{{{1.0, 0.0}}, 2};
    const auto st = state::make_state(pi / 2, 0);
    for (double tau : {0.4, 1.7}) {
        auto ex = oracle::exact_survival(tau, 3, st, sys, 1.0, 0.05);
        const double rabi = commands::isolated_survival(st, 1.0, 0.05, tau);
        for (double s : ex.survival) EXPECT_NEAR(s, rabi, 1e-10);
    }
}

TEST(ExactSurvival, ProbabilitiesAndUnitarity) {
    auto ex = oracle::exact_survival(2.0, 5, state::make_state(1.0, 0.3), small_system(4), 1.0, 0.05);
    for (double s : ex.survival) {
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0 + 1e-12);
    }
    EXPECT_LE(ex.unitarity_error, 1e-10);
    EXPECT_FALSE(ex.flagged);
}

TEST(ExactSurvival, LeakageFlag) {
    // a displacement this large fills the top Fock level
    oracle::DiscreteBathSystem sys{{{0.5, 1.0}}, 2};
    auto ex = oracle::exact_survival(1.0, 2, state::make_state(pi / 2, 0), sys, 1.0, 0.05);
    EXPECT_TRUE(ex.flagged);
    EXPECT_GT(ex.leakage, oracle::ExactSurvival::kLeakageLimit);
}

TEST(ExactSurvival, PerturbativeDeviationScaling) {
    commands::RunConfig cfg;
    auto rep = commands::run_oracle(cfg);
    EXPECT_GE(rep.exponent, 2.5);
    EXPECT_FALSE(rep.flagged);
}

TEST(BathTrace, ZeroArguments) {
    auto sys = small_system(5);
    bath::BathPhases ph(sys.spectral_density(), bath::Temperature::zero());
    EXPECT_LE(std::abs(oracle::bath_trace_check(0, 0, 0, sys) - ph.w_factor(0, 0, 0)), 1e-12);
    EXPECT_LE(std::abs(oracle::bath_trace_check_prime(0, 0, 0, sys) - ph.w_prime_factor(0, 0, 0)), 1e-12);
}

TEST(BathTrace, NoCouplingIsOne) {
    oracle::DiscreteBathSystem sys{{{1.0, 0.0}, {2.0, 0.0}}, 5};
    EXPECT_LE(std::abs(oracle::bath_trace_check(0.3, 0.8, 1.1, sys) - 1.0), 1e-15);
}

TEST(BathTrace, RandomTimesAgreeWithPhaseFormula) {
    oracle::DiscreteBathSystem sys{{{0.8, {0.2, 0.05}}, {1.7, {0.1, -0.15}}}, 5};
    bath::BathPhases ph(sys.spectral_density(), bath::Temperature::zero());
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 10; ++i) {
        double t1 = u(rng), t2 = u(rng), tau = u(rng);
        cplx w = ph.w_factor(t1, t2, tau) * std::exp(cplx(0, -ph.phi_I(t2) - ph.phi_I(t1) + ph.phi_I(tau)));
        cplx wp = ph.w_prime_factor(t1, t2, tau) * std::exp(cplx(0, ph.phi_I(t2) - ph.phi_I(t1) + ph.phi_I(tau)));
        cplx a = oracle::bath_trace_check(t1, t2, tau, sys), b = oracle::bath_trace_check_prime(t1, t2, tau, sys);
        EXPECT_LE(std::abs(w - a) / std::abs(a), 1e-4);
        EXPECT_LE(std::abs(wp - b) / std::abs(b), 1e-4);
    }
}

TEST(RefineQuadrature, ExactCasesAndOscillatoryReferences) {
    using oracle::Domain;
    auto one = [](double, double) -> cplx { return 1.0; };
    EXPECT_NEAR(oracle::refine_quadrature(one, Domain::triangle(2.0), 1e-13).real(), 2.0, 1e-13);
    EXPECT_NEAR(oracle::refine_quadrature(one, Domain::square(2.0), 1e-13).real(), 4.0, 1e-13);
    const cplx I(0, 1);
    auto osc = [&](double a, double b) { return std::exp(-I * (a - b)); };
    const double tau = 2.0;
    EXPECT_LE(std::abs(oracle::refine_quadrature(osc, Domain::triangle(tau), 1e-13) - (tau - (1.0 - std::exp(-I * tau)) / I) / I),
              1e-12);
    EXPECT_LE(std::abs(oracle::refine_quadrature(osc, Domain::square(tau), 1e-13) - std::norm(1.0 - std::exp(-I * tau))),
              1e-12);
    auto damped = [](double w) -> cplx { return std::exp(-w) * std::cos(5 * w); };
    EXPECT_NEAR(oracle::refine_quadrature(damped, Domain::interval(0, 60), 1e-14).real(), 1.0 / 26.0, 1e-12);
}

TEST(System, Validation) {
    oracle::DiscreteBathSystem sys{{{1.0, 0.1}}, 7};
    EXPECT_THROW(sys.validate(), InvalidParameters);
    oracle::DiscreteBathSystem big{std::vector<bath::Mode>(6, {1.0, 0.1}), 6};
    EXPECT_THROW(big.validate(), InvalidParameters);
    EXPECT_THROW(oracle::exact_survival(1.0, 1, state::make_state(0, 0), small_system(2), 1.0, 0.05,
                                        bath::Temperature::inverse(1.0)),
                 InvalidParameters);
}
