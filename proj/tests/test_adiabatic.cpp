#include "doctest.h"

#include <cmath>
#include <numbers>

#include "adiabatic.hpp"
#include "errors.hpp"
#include "regime_ode.hpp"

using namespace coagscale;

TEST_CASE("stations are ordered and omega is antisymmetric") {
    for (double w0 : {0.01, 0.1, 1.0, 10.0, 30.0}) {
        CAPTURE(w0);
        auto p = adiabatic::sigma_profile(w0);
        CHECK(0.0 < p.xi[0]);
        CHECK(p.xi[0] < p.xi[1]);
        CHECK(p.xi[1] < p.xi[2]);
        CHECK(p.xi[2] < p.xi[3]);
        CHECK(p.omega[0] == doctest::Approx(-p.omega[1]).epsilon(1e-8));
        CHECK(p.omega[2] == doctest::Approx(-w0).epsilon(1e-8));
        CHECK(p.xi[3] == doctest::Approx(regime::period(p.energy)).epsilon(1e-8));
    }
}

TEST_CASE("time and omega routes agree and sigma closes on phi") {
    for (double w0 : {0.01, 0.1, 1.0, 10.0, 30.0}) {
        CAPTURE(w0);
        auto p = adiabatic::sigma_profile(w0);
        double scale = std::max(std::abs(p.phi), 1e-300);
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(p.sigma[k] - p.sigma_by_omega[k]) < 1e-6 * scale);
        CHECK(std::abs(p.sigma[3] - p.phi) < 1e-6 * scale);
    }
}

TEST_CASE("small and large amplitude asymptotics") {
    auto small = adiabatic::sigma_profile(1e-2);
    CHECK(small.sigma[1] / 1e-4 == doctest::Approx(std::numbers::pi / 2).epsilon(0.03));
    auto big = adiabatic::sigma_profile(30.0);
    CHECK(big.sigma[0] / 27000.0 == doctest::Approx(-std::sqrt(3.0) / 9.0).epsilon(0.05));
    // sigma_1 is o(omega0^2)
    double r1 = std::abs(adiabatic::sigma_profile(0.04).sigma[0]) / 0.0016;
    double r2 = std::abs(adiabatic::sigma_profile(0.02).sigma[0]) / 0.0004;
    double r3 = std::abs(small.sigma[0]) / 1e-4;
    CHECK(r1 > r2);
    CHECK(r2 > r3);
}

TEST_CASE("sigma stays within its station envelope") {
    for (double w0 : {0.01, 0.1, 1.0, 10.0, 30.0}) {
        CAPTURE(w0);
        auto r = adiabatic::sandwich_check(w0);
        CHECK(r.ok);
        CHECK(r.lower <= 0.0);
        CHECK(r.upper > 0.0);
    }
}

TEST_CASE("invalid amplitude") {
    CHECK_THROWS_AS(adiabatic::sigma_profile(0.0), DomainError);
    CHECK_THROWS_AS(adiabatic::sandwich_check(-1.0), DomainError);
}
