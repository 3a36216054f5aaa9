// test_quadrature.cpp — node caches, semi-infinite and 2-D time-domain rules
#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "zenoscope/quadrature.hpp"

namespace zq = zenoscope::quadrature;
using cplx = std::complex<double>;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    const auto& r = zq::gauss_legendre(10);
    double s0 = 0, s18 = 0;
    for (int i = 0; i < 10; ++i) {
        s0 += r.w[i];
        s18 += r.w[i] * std::pow(r.x[i], 18);
    }
    EXPECT_NEAR(s0, 2.0, 1e-15);
    EXPECT_NEAR(s18, 2.0 / 19.0, 1e-15);
}

TEST(GaussLegendre, CacheReturnsSameRule) { EXPECT_EQ(&zq::gauss_legendre(64), &zq::gauss_legendre(64)); }

TEST(GaussLaguerre, GeneralizedWeightMoments) {
    const auto& r = zq::gauss_laguerre(40, 0.5);
    double m0 = 0, m3 = 0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        m0 += r.w[i];
        m3 += r.w[i] * r.x[i] * r.x[i] * r.x[i];
    }
    EXPECT_NEAR(m0, std::tgamma(1.5), 1e-13);
    EXPECT_NEAR(m3, std::tgamma(4.5), 1e-11);
}

TEST(SemiInfinite, ExponentialIsOne) {
    auto r = zq::integrate_semi_infinite([](double w) { return std::exp(-w); }, {});
    EXPECT_NEAR(r.value.real(), 1.0, 1e-12);
}

TEST(SemiInfinite, LinearTimesExponentialIsOne) {
    auto r = zq::integrate_semi_infinite([](double w) { return w * std::exp(-w); }, {});
    EXPECT_NEAR(r.value.real(), 1.0, 1e-12);
}

TEST(SemiInfinite, DampedCosine) {
    auto r = zq::integrate_semi_infinite([](double w) { return std::exp(-w) * std::cos(5.0 * w); }, {}, 1.0, 5.0);
    EXPECT_NEAR(r.value.real(), 1.0 / 26.0, 1e-10);
}

TEST(SemiInfinite, FastOscillationFallsBackToAdaptive) {
    // Laguerre alone cannot resolve cos(200 w); the adaptive path must
    auto r = zq::integrate_semi_infinite([](double w) { return std::exp(-w) * std::cos(200.0 * w); }, {}, 1.0, 200.0);
    EXPECT_NEAR(r.value.real(), 1.0 / 40001.0, 1e-10);
}

TEST(AdaptiveGK, SmoothIntegral) {
    auto r = zq::adaptive_gk<double>([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13, 0.0, 1, 1000);
    EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Triangle, ConstantIsHalfSquare) {
    auto r = zq::integrate_triangle([](double, double) { return 1.0; }, 3.0);
    EXPECT_NEAR(r.value.real(), 4.5, 1e-13);
}

TEST(Triangle, ProductMoment) {
    auto r = zq::integrate_triangle([](double a, double b) { return a * b; }, 2.0);
    EXPECT_NEAR(r.value.real(), 16.0 / 8.0, 1e-13);
}

TEST(Triangle, OscillatoryMatchesAntiderivative) {
    const double eps = 1.0, tau = 2.0;
    auto r = zq::integrate_triangle([&](double a, double b) { return std::exp(cplx(0, -eps * (a - b))); }, tau);
    // inner: int_0^t1 e^{-i(t1-t2)} dt2 = (1 - e^{-i t1}) / i
    const cplx I(0, 1);
    const cplx exact = (tau - (1.0 - std::exp(-I * tau)) / I) / I;
    EXPECT_LT(std::abs(r.value - exact), 1e-12);
}

TEST(Square, ConstantAndLinear) {
    EXPECT_NEAR(zq::integrate_square([](double, double) { return 1.0; }, 1.7).value.real(), 1.7 * 1.7, 1e-13);
    EXPECT_NEAR(zq::integrate_square([](double a, double b) { return a + b; }, 1.3).value.real(), std::pow(1.3, 3), 1e-13);
}

TEST(Square, OscillatoryMatchesAntiderivative) {
    const double tau = 2.0;
    auto r = zq::integrate_square([](double a, double b) { return std::exp(cplx(0, -(a - b))); }, tau);
    const double exact = std::norm((std::exp(cplx(0, -tau)) - 1.0) / cplx(0, -1));
    EXPECT_LT(std::abs(r.value - exact), 1e-12);
}

TEST(Square, TriangleAndReflectionMakeSquare) {
    auto f = [](double a, double b) { return std::cos(a * b) + a * a + b * b; };
    const double tau = 2.5;
    auto tri = zq::integrate_triangle(f, tau).value.real();
    auto refl = zq::integrate_triangle([&](double a, double b) { return f(b, a); }, tau).value.real();
    auto sq = zq::integrate_square(f, tau).value.real();
    EXPECT_NEAR((tri + refl) / sq, 1.0, 1e-12);
}

TEST(Square, DoublingStaysWithinErrorEstimate) {
    auto f = [](double a, double b) { return std::exp(cplx(-0.3 * a, -7.0 * (a - b))); };
    zq::QuadratureSpec spec;
    spec.nodes_2d = 16;
    auto r = zq::integrate_square(f, 4.0, spec);
    spec.nodes_2d = 256;
    auto fine = zq::integrate_square(f, 4.0, spec);
    EXPECT_LE(std::abs(fine.value - r.value), std::max(r.error, 1e-13));
}

TEST(OscillationGuard, RaisesNodeCount) {
    EXPECT_EQ(zq::guarded_nodes(128, 1.0, 1.0), 128);
    const int n = zq::guarded_nodes(16, 10.0, 100.0);
    EXPECT_GE(n / (10.0 * 100.0 / (2 * std::numbers::pi)), 10.0 - 1e-9);
}

TEST(Spec, RejectsTinyCounts) {
    zq::QuadratureSpec s;
    s.nodes_1d = 4;
    EXPECT_THROW(s.validate(), zenoscope::InvalidParameters);
    s = {};
    s.rel_tol = 0.0;
    EXPECT_THROW(s.validate(), zenoscope::InvalidParameters);
}
