#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

using namespace coagscale;
using special::cplx;

namespace {

// reference roots from a 30-digit mpmath solve
struct RootRef {
    double lambda;
    double re;
    double im;
    double k_upper;
};

const std::vector<RootRef> kRoots = {
    {1e-3, 0.00049977846480146, 0.031613209381209, 1.1044328},
    {1e-2, 0.0049777586933353, 0.099697371083802, 1.3684944},
    {0.05, 0.024433743165446, 0.22021774946772, 2.0079937},
    {0.1, 0.047679196881737, 0.30661359973958, 2.6566112},
    {0.2, 0.090198395670616, 0.41975759882948, 3.8579813},
    {0.3, 0.12651277390635, 0.49646556124337, 4.9586055},
};

}  // namespace

TEST_CASE("log gamma agrees with the C library") {
    for (double x : {0.05, 0.5, 0.9, 1.0, 1.7, 3.3, 10.0, 47.5, 170.0}) {
        CHECK(special::log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-14));
        CHECK(special::log_gamma(cplx(x, 0.0)).real() == doctest::Approx(std::lgamma(x)).epsilon(1e-14));
    }
    for (double x : {-0.5, -0.02, -0.97, -1.5, 0.3, 4.0})
        CHECK(special::gamma(x) == doctest::Approx(std::tgamma(x)).epsilon(1e-13));
    CHECK_THROWS_AS(special::gamma(-2.0), DomainError);
    CHECK_THROWS_AS(special::log_gamma(-1.0), DomainError);
}

TEST_CASE("complex log gamma satisfies the recurrence and reflection") {
    for (cplx z : {cplx(0.3, 0.7), cplx(1.2, -3.0), cplx(5.0, 10.0), cplx(0.01, 0.2)}) {
        cplx lhs = std::exp(special::log_gamma(z + 1.0));
        cplx rhs = z * std::exp(special::log_gamma(z));
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));
    }
    // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
    for (double y : {0.1, 1.0, 4.0}) {
        double m = std::norm(std::exp(special::log_gamma(cplx(0.5, y))));
        CHECK(m == doctest::Approx(M_PI / std::cosh(M_PI * y)).epsilon(1e-13));
    }
}

TEST_CASE("complex digamma matches a finite difference of log gamma") {
    for (cplx z : {cplx(0.4, 0.3), cplx(2.0, -1.0), cplx(0.9, 0.05)}) {
        double eps = 1e-5;
        cplx fd = (special::log_gamma(z + eps) - special::log_gamma(z - eps)) / (2 * eps);
        CHECK(std::abs(special::digamma(z) - fd) < 1e-9);
    }
    CHECK(special::digamma(cplx(1.0, 0.0)).real() == doctest::Approx(-0.57721566490153286).epsilon(1e-14));
}

TEST_CASE("beta function identities") {
    CHECK(special::beta_function(0.5, 0.5) == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(special::beta_function(0.9, 0.9) == doctest::Approx(1.2260974891062873).epsilon(1e-13));
    for (double p : {0.1, 0.7, 2.5})
        for (double q : {0.3, 1.0, 4.0}) {
            CHECK(special::beta_function(p, q) == doctest::Approx(special::beta_function(q, p)).epsilon(1e-14));
            double ref = std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
            CHECK(special::beta_function(p, q) == doctest::Approx(ref).epsilon(1e-13));
        }
    CHECK_THROWS_AS(special::beta_function(0.0, 1.0), DomainError);
}

TEST_CASE("kernel constant") {
    CHECK(special::h_lambda(0.1) == doctest::Approx(0.081559583058024884).epsilon(1e-13));
    for (double lam : {1e-4, 1e-3, 1e-2})
        CHECK(special::h_lambda(lam) / lam == doctest::Approx(1.0).epsilon(3 * lam));
    CHECK_THROWS_AS(special::h_lambda(0.5), DomainError);
    CHECK_THROWS_AS(special::h_lambda(0.0), DomainError);
}

TEST_CASE("psi at mu = 0 and conjugate symmetry") {
    for (double lam : {0.01, 0.1, 0.3}) {
        double b0 = special::beta_function(1 - lam, 1 - lam);
        CHECK(std::abs(special::psi(lam, 0.0) + lam * b0) < 1e-14);
        cplx mu(0.3 * lam, 0.7);
        CHECK(std::abs(special::psi(lam, std::conj(mu)) - std::conj(special::psi(lam, mu))) < 1e-14);
    }
}

TEST_CASE("psi derivative matches finite differences") {
    double lam = 0.2;
    cplx mu(0.1, 0.4);
    double eps = 1e-6;
    cplx fd = (special::psi(lam, mu + eps) - special::psi(lam, mu - eps)) / (2 * eps);
    CHECK(std::abs(special::psi_derivative(lam, mu) - fd) < 1e-8);
}

TEST_CASE("dispersion root matches frozen reference values") {
    for (const auto& r : kRoots) {
        CAPTURE(r.lambda);
        cplx mu = special::dispersion_root(r.lambda);
        CHECK(mu.real() == doctest::Approx(r.re).epsilon(1e-11));
        CHECK(mu.imag() == doctest::Approx(r.im).epsilon(1e-11));
        CHECK(std::abs(special::psi(r.lambda, mu)) < 1e-12);
        CHECK(mu.real() > 0.0);
        CHECK(mu.real() < r.lambda);
        auto p = special::ModelParams::make(r.lambda);
        CHECK(p.k_interval_upper == doctest::Approx(r.k_upper).epsilon(1e-6));
        CHECK(p.alpha == mu.imag());
        CHECK(p.beta == mu.real());
    }
}

TEST_CASE("dispersion root approaches its small-lambda asymptote") {
    std::vector<double> lams = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    std::vector<double> logs, logd;
    for (double lam : lams) {
        cplx mu = special::dispersion_root(lam);
        logs.push_back(std::log(lam));
        logd.push_back(std::log(std::abs(mu - cplx(lam / 2, std::sqrt(lam)))));
    }
    double n = lams.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lams.size(); ++i) {
        sx += logs[i];
        sy += logd[i];
        sxx += logs[i] * logs[i];
        sxy += logs[i] * logd[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(1.5).epsilon(0.2 / 1.5));
}

TEST_CASE("dispersion root rejects lambda outside (0, 1/2)") {
    CHECK_THROWS_AS(special::dispersion_root(0.6), DomainError);
    CHECK_THROWS_AS(special::dispersion_root(-0.1), DomainError);
    CHECK_THROWS_AS(special::ModelParams::make(0.5), DomainError);
}
