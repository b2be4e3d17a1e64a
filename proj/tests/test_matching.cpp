#include "doctest.h"

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "matching.hpp"
#include "peaks.hpp"
#include "regime_ode.hpp"
#include "special.hpp"

using namespace coagscale;
using namespace coagscale::matching;

TEST_CASE("single cycle follows the matching formulas") {
    const double lam = 1e-3, a = 0.3;
    auto st = advance_cycle(lam, a, 2.0);
    REQUIRE(st.has_value());
    const auto& r = st->record;
    double g = std::tgamma(a), gm = std::tgamma(-a);
    CHECK(gm < 0.0);
    CHECK(-2.0 * a / ((1.0 - a) * gm) > 0.0);
    CHECK(std::abs(r.x_zero - (2.0 + std::log(2.0 * a / ((1.0 + a) * g * lam)) / a)) < 1e-12);
    CHECK(std::abs(r.x_minus - (r.x_zero + std::log(-2.0 * a / ((1.0 - a) * gm * lam)) / a)) < 1e-12);
    CHECK(std::abs(st->next_a - 0.3754715929) < 1e-9);
    CHECK(r.x_plus < r.x_zero);
    CHECK(r.x_zero < r.x_minus);
    CHECK(r.x_minus < st->next_x_plus);
    CHECK(std::abs(r.energy - a * a / (2.0 * lam)) < 1e-12);
    // leading-order spacing once lambda is small
    auto tiny = advance_cycle(1e-5, a, 0.0);
    CHECK(std::abs(tiny->next_x_plus / spacing_from_amplitudes(1e-5, a) - 1.0) < 0.05);
    CHECK_FALSE(advance_cycle(lam, 1.0, 0.0).has_value());
    CHECK_FALSE(advance_cycle(lam, 1.5, 0.0).has_value());
    CHECK_THROWS_AS(advance_cycle(lam, 0.0, 0.0), DomainError);
}

TEST_CASE("recursion terminates with increasing amplitudes") {
    for (double a1 : {1e-3, 0.05, 0.4, 0.9}) {
        auto seq = run_recursion(1e-3, a1, 0.0, 100000);
        CHECK(seq.terminated);
        CHECK(seq.next_a >= 1.0);
        for (std::size_t k = 1; k < seq.records.size(); ++k) {
            CHECK(seq.records[k].a > seq.records[k - 1].a);
            CHECK(seq.records[k - 1].x_minus < seq.records[k].x_plus);
        }
    }
    auto capped = run_recursion(1e-3, 0.01, 0.0, 3);
    CHECK(capped.records.size() == 3);
    CHECK_FALSE(capped.terminated);
    CHECK_THROWS_AS(run_recursion(1e-3, 1.2, 0.0, 5), DomainError);
}

TEST_CASE("small amplitude recursion against direct iteration of the quadratic map") {
    // a' = a + (2/3) a^2 + O(a^3); compare after k steps with the truncated map
    const double a1 = 1e-4;
    auto seq = run_recursion(1e-6, a1, 0.0, 20);
    double a = a1;
    for (int k = 1; k < 20; ++k) {
        a = a + 2.0 / 3.0 * a * a;
        CHECK(std::abs(seq.records[k].a - a) < 20 * a * a * a + 1e-15);
    }
}

TEST_CASE("spacing and energy bridges at small amplitude") {
    const double lam = 1e-3;
    for (double a : {0.02, 0.05, 0.1}) {
        double e = energy_of(lam, a);
        double s1 = spacing_from_amplitudes(lam, a), s2 = spacing_from_period(lam, e), s3 = spacing_linear(lam, a);
        CHECK(std::abs(s1 / s2 - 1.0) < 0.1);
        CHECK(std::abs(s1 / s3 - 1.0) < 0.1);
        CHECK(std::abs(s2 / s3 - 1.0) < 1e-12);
        double quad = a + 2.0 / 3.0 * a * a;
        double de_quad = energy_of(lam, quad) - e;
        CHECK(std::abs(de_quad / energy_increment_predicted(lam, e) - 1.0) < 0.1);
    }
    // the exact map adds an O(a) correction: 2% at a = 0.02, 11% at a = 0.1
    CHECK(std::abs(energy_increment(lam, 0.02) / energy_increment_predicted(lam, energy_of(lam, 0.02)) - 1.0) < 0.03);
    CHECK(energy_increment(lam, 0.1) / energy_increment_predicted(lam, energy_of(lam, 0.1)) > 1.1);
    // peak spacing from the full recursion approaches the period bridge when lambda is much smaller than a^2
    auto seq = run_recursion(1e-8, 0.05, 0.0, 2);
    double sp = seq.records[1].x_plus - seq.records[0].x_plus;
    CHECK(std::abs(sp * std::sqrt(1e-8) / (2.0 * std::numbers::sqrt2 * std::sqrt(seq.records[0].energy)) - 1.0) < 0.1);
    // per-cycle energy change at a = 0.05, lambda = 1e-4
    double e = energy_of(1e-4, 0.05);
    CHECK(std::abs(energy_increment(1e-4, 0.05) / energy_increment_predicted(1e-4, e) - 1.0) < 0.1);
}

TEST_CASE("composite profile branches") {
    const double lam = 1e-3;
    auto seq = run_recursion(lam, 0.3, 0.0, 10);
    REQUIRE(seq.records.size() >= 2);
    const auto& r = seq.records[0];
    auto at_plus = composite_profile(seq, r.x_plus);
    CHECK(at_plus.regime == Regime::Ramp);
    CHECK(std::abs(at_plus.h - 1.3) < 1e-12);
    auto at_zero = composite_profile(seq, r.x_zero);
    CHECK(at_zero.regime == Regime::Peak);
    auto pk = peaks::eval_H(peaks::make_peak(0.3), 0.0);
    CHECK(std::abs(at_zero.h - pk / lam) < 1e-9 / lam);
    CHECK(at_zero.h > 0.01 / lam);
    CHECK(composite_profile(seq, r.x_minus + 0.1).regime == Regime::Decay);
    double mid = 0.5 * (r.x_minus + seq.records[1].x_plus);
    auto val = composite_profile(seq, mid + 1.0);
    CHECK(val.regime == Regime::Valley);
    CHECK(val.h < 1e-3);
    // the valley closes onto the next ramp
    CHECK(std::abs(valley_h(lam, r.a, seq.records[1].x_plus - r.x_minus) - (1.0 + seq.records[1].a)) < 1e-3);
    double prev = valley_h(lam, r.a, 0.0);
    CHECK(std::abs(prev - (1.0 - r.a)) < 1e-6);
    for (double d = 1.0; d < 0.5 * (seq.records[1].x_plus - r.x_minus); d += 7.0) {
        double v = valley_h(lam, r.a, d);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(composite_profile(seq, r.x_plus - 1.0), RangeError);
    CHECK_THROWS_AS(composite_profile(seq, seq.next_x_plus + 1.0), RangeError);
}

TEST_CASE("ramp and peak agree on their overlap") {
    const double lam = 1e-3;
    // the peak carries a relative correction of about 2 e^{a (X - X0)}, so small a needs a wider gap
    for (double a : {0.3, 0.5}) {
        auto st = advance_cycle(lam, a, 0.0);
        double gap = st->record.x_zero;
        for (double d = 2.0; d <= gap / 2.0; d += 0.25)
            CHECK(std::abs(peak_h(lam, a, d - gap) / ramp_h(a, d) - 1.0) < 0.15);
    }
}

TEST_CASE("tail prediction") {
    const double lam = 0.1, xn = 3.0;
    double best = 0.0, arg = 0.0;
    for (double x = 0.01; x < 30.0; x += 0.001) {
        double v = tail_prediction(lam, xn, x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    CHECK(std::abs(best - 2.0 / (lam * std::numbers::e)) < 1e-8);
    CHECK(std::abs(arg - xn) < 2e-3);
    // matches the unit peak scaled by 1/lambda
    for (double X : {-1.0, 0.0, 0.7, 1.5}) {
        double x0 = 0.4;
        double peak = peaks::eval_closed_form(1.0, X - x0).h / lam;
        CHECK(std::abs(tail_prediction(lam, std::exp(x0), std::exp(X)) - peak) < 1e-9 * peak);
    }
    CHECK_THROWS_AS(tail_prediction(lam, 0.0, 1.0), DomainError);
}

TEST_CASE("tail fit recovers the exact profile") {
    auto p = special::ModelParams::make(0.1);
    profile::LogGrid g{-2.0, 0.01, 601};
    const double xn = std::exp(0.3);
    std::vector<double> h, one(g.count, 1.0);
    for (std::size_t i = 0; i < g.count; ++i) h.push_back(tail_prediction(0.1, xn, std::exp(g.node(i))));
    profile::Trajectory t(p, g, h, one, one, 0.0);
    auto f = tail_fit(t, xn);
    CHECK(std::abs(f.slope - 1.0) < 1e-10);
    CHECK(std::abs(f.intercept) < 1e-10);
    CHECK(f.points > 50);
    CHECK_THROWS_AS(tail_fit(t, xn * 1e6), RangeError);
}
