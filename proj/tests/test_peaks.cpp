#include "doctest.h"

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "peaks.hpp"

using namespace coagscale;
using peaks::cplx;

TEST_CASE("laplace symbol") {
    double a = 0.7, kappa = 1.3;
    double z = std::pow(kappa, 1.0 / a);
    CHECK(std::abs(peaks::laplace_symbol(a, kappa, z) - 1.0 / z) < 1e-15);
    for (cplx z : {cplx(0.5, 0.0), cplx(2.0, 3.0), cplx(-1.0, 0.5)})
        CHECK(std::abs(peaks::laplace_symbol(1.0, 1.0, z) - 2.0 / (z + 1.0)) < 1e-14);
    cplx q(0.3, 1.7);
    CHECK(std::abs(peaks::laplace_symbol(a, kappa, std::conj(q)) - std::conj(peaks::laplace_symbol(a, kappa, q))) < 1e-15);
    CHECK_THROWS_AS(peaks::laplace_symbol(1.0, 1.0, cplx(-1.0, 0.0)), DomainError);
    CHECK_THROWS_AS(peaks::laplace_symbol(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("contour route reproduces the unit closed forms") {
    auto sol = peaks::make_peak(1.0);
    for (double X = -5.0; X <= 3.0 + 1e-12; X += 0.05) {
        auto c = peaks::eval_contour(sol, X);
        double ex = std::exp(X);
        CHECK(std::abs(c.v - 2.0 * std::exp(-ex)) < 1e-8);
        CHECK(std::abs(c.h - 2.0 * ex * std::exp(-ex)) < 1e-8);
        CHECK(std::abs(c.u - 2.0 / ex * (1.0 - (1.0 + ex) * std::exp(-ex))) < 1e-8);
        CHECK(c.imag_residue < 1e-10);
    }
}

TEST_CASE("unit amplitude dispatches to closed forms with kappa") {
    auto sol = peaks::make_peak(1.0, 2.5);
    auto p = peaks::eval(sol, 0.3);
    double x = 2.5 * std::exp(0.3);
    CHECK(p.v == doctest::Approx(2.0 * std::exp(-x)).epsilon(1e-15));
    auto c = peaks::eval_contour(sol, 0.3);
    CHECK(std::abs(c.v - p.v) < 1e-12);
    CHECK(std::abs(c.h - p.h) < 1e-12);
    CHECK(std::abs(c.u - p.u) < 1e-12);
}

TEST_CASE("boundary limits for a = 0.5") {
    auto sol = peaks::make_peak(0.5);
    // the growth-side correction -(2/Gamma(a)) e^{aX} is still 5e-5 at X = -20
    double vm = peaks::eval_V(sol, -20.0);
    CHECK(vm == doctest::Approx(1.5 - 2.0 / std::tgamma(0.5) * std::exp(-10.0)).epsilon(1e-8));
    CHECK(std::abs(peaks::eval_V(sol, -60.0) - 1.5) < 1e-6);
    CHECK(std::abs(peaks::eval_V(sol, 40.0) - 0.5) < 1e-6);
}

TEST_CASE("monotone and positive profiles for a < 1") {
    for (double a : {0.2, 0.5, 0.9}) {
        auto sol = peaks::make_peak(a);
        double prev = 1e300;
        for (int i = 0; i < 100; ++i) {
            double X = -15.0 + 30.0 * i / 99.0;
            auto p = peaks::eval(sol, X);
            CAPTURE(a);
            CAPTURE(X);
            CHECK(p.v < prev);
            CHECK(p.h > 0.0);
            CHECK(p.u > 0.0);
            CHECK(p.imag_residue < 1e-10);
            prev = p.v;
        }
    }
}

TEST_CASE("V changes sign for a > 1") {
    auto sol = peaks::make_peak(1.5);
    CHECK(peaks::eval_V(sol, -10.0) > 0.0);
    CHECK(peaks::eval_V(sol, 20.0) < 0.0);
    CHECK(peaks::eval_V(sol, 20.0) == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("derivative identities by finite differences") {
    for (double a : {0.5, 1.5}) {
        auto sol = peaks::make_peak(a);
        for (double X : {-3.0, 0.0, 1.5}) {
            double d = 1e-4;
            double dv = (peaks::eval_V(sol, X + d) - peaks::eval_V(sol, X - d)) / (2 * d);
            CHECK(std::abs(-dv - peaks::eval_H(sol, X)) < 1e-6);
            double du = (peaks::eval_U(sol, X + d) - peaks::eval_U(sol, X - d)) / (2 * d);
            CHECK(std::abs(du + peaks::eval_U(sol, X) - peaks::eval_H(sol, X)) < 1e-6);
        }
    }
}

TEST_CASE("growth-side asymptotics") {
    auto sol = peaks::make_peak(0.5);
    double X = -30.0;
    double g = std::exp(0.5 * X);
    CHECK(peaks::eval_H(sol, X) / g == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-5));
    CHECK(peaks::eval_U(sol, X) / g == doctest::Approx(1.0 / (std::sqrt(std::numbers::pi) * 1.5)).epsilon(1e-5));
}

TEST_CASE("decay coefficients") {
    auto c = peaks::decay_coefficients(0.5);
    CHECK(c.c_minus == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK(c.c_plus == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK_THROWS_AS(peaks::decay_coefficients(1.0), DomainError);
    CHECK(peaks::growth_coefficient(1.0) == doctest::Approx(2.0));

    auto sol = peaks::make_peak(0.5);
    double X1 = 30.0;
    CHECK(peaks::eval_H(sol, X1) / std::exp(-0.5 * X1) == doctest::Approx(c.c_plus).epsilon(1e-5));
    // least-squares slope of log H over [8/a, 12/a]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 21;
    for (int i = 0; i < n; ++i) {
        double X = 16.0 + 8.0 * i / (n - 1);
        double y = std::log(peaks::eval_H(sol, X));
        sx += X;
        sy += y;
        sxx += X * X;
        sxy += X * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.02));
}

TEST_CASE("convolution residual vanishes") {
    for (double a : {0.5, 1.0, 1.5}) {
        auto sol = peaks::make_peak(a);
        for (double x : {0.5, 1.0, 2.0}) {
            CAPTURE(a);
            CAPTURE(x);
            CHECK(std::abs(peaks::convolution_residual(sol, x)) < 1e-6);
        }
    }
    auto sol = peaks::make_peak(0.5);
    CHECK(std::abs(peaks::convolution_residual(sol, 1e-8)) < 1e-10);
    CHECK_THROWS_AS(peaks::convolution_residual(sol, 0.0), DomainError);
}

TEST_CASE("kappa rescales the argument by kappa^(1/a)") {
    double a = 0.5, kappa = 3.0;
    auto s1 = peaks::make_peak(a, 1.0);
    auto sk = peaks::make_peak(a, kappa);
    for (double X : {-2.0, 0.0, 2.5})
        CHECK(peaks::eval_V(sk, X) == doctest::Approx(peaks::eval_V(s1, X + std::log(kappa) / a)).epsilon(1e-11));
}

TEST_CASE("results do not depend on the contour angle") {
    for (double a : {0.5, 1.5}) {
        double lim = std::min(std::numbers::pi / a, std::numbers::pi);
        auto s1 = peaks::make_peak(a, 1.0, std::numbers::pi / 2 + 0.3 * (lim - std::numbers::pi / 2));
        auto s2 = peaks::make_peak(a, 1.0, std::numbers::pi / 2 + 0.7 * (lim - std::numbers::pi / 2));
        for (double X : {-4.0, 0.0, 3.0}) {
            auto p1 = peaks::eval(s1, X);
            auto p2 = peaks::eval(s2, X);
            CHECK(std::abs(p1.v - p2.v) < 1e-9);
            CHECK(std::abs(p1.h - p2.h) < 1e-9);
            CHECK(std::abs(p1.u - p2.u) < 1e-9);
        }
    }
}

TEST_CASE("invalid peaks") {
    CHECK_THROWS_AS(peaks::make_peak(0.0), DomainError);
    CHECK_THROWS_AS(peaks::make_peak(2.0), DomainError);
    CHECK_THROWS_AS(peaks::make_peak(0.5, -1.0), DomainError);
    CHECK_THROWS_AS(peaks::make_peak(1.5, 1.0, 2.5), DomainError);
}
