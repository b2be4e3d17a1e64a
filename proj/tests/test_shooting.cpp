#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "errors.hpp"
#include "shooting.hpp"

using namespace coagscale;
using namespace coagscale::shooting;

namespace {

double max_abs_residual(const Trajectory& t, std::size_t stride) {
    double m = 0.0;
    for (double r : profile::fixed_point_residual(t, stride)) m = std::max(m, std::abs(r));
    return m;
}

}  // namespace

TEST_CASE("weights integrate the constant history exactly") {
    for (double lam : {0.05, 0.1, 0.3}) {
        HistoryWeights w(lam, 0.02);
        double b = special::beta_function(1.0 - lam, 1.0 - lam);
        double expected = (b - 1.0 / (1.0 - lam)) / lam;
        CHECK(std::abs(w.total() - expected) < 1e-11 * expected);
        CHECK(w.weight(0, 0) > 0.0);
        CHECK(w.weight(w.columns() + 5, 0) == 0.0);
    }
}

TEST_CASE("zero amplitude keeps the constant state") {
    auto p = ModelParams::make(0.1);
    LogGrid g{-20.0, 0.02, 2001};
    auto o = march(p, 0.0, g);
    CHECK(o.classification == Classification::Budget);
    CHECK(o.cycles.empty());
    CHECK(o.trajectory.size() == g.count);
    for (std::size_t i = 0; i < g.count; i += 97) {
        CHECK(std::abs(o.trajectory.h_values()[i] - 1.0) < 1e-12);
        CHECK(std::abs(o.trajectory.u_values()[i] - 1.0) < 1e-12);
        CHECK(std::abs(o.trajectory.v_values()[i] - 1.0) < 1e-12);
    }
}

TEST_CASE("translation along the spiral shifts the trajectory") {
    auto p = ModelParams::make(0.1);
    HistoryWeights w(p.lambda, 0.02);
    LogGrid g1{-150.0, 0.02, 6000};
    const double a = 1.0;  // 50 steps
    LogGrid g2{-150.0 - a, 0.02, 6000};
    cplx K(1.3, 0.0);
    auto o1 = march(w, p, K, g1);
    auto o2 = march(w, p, K * std::exp(p.mu_plus * a), g2);
    REQUIRE(o1.trajectory.size() == o2.trajectory.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < o1.trajectory.size(); ++i)
        worst = std::max(worst, std::abs(o1.trajectory.h_values()[i] - o2.trajectory.h_values()[i]));
    CHECK(worst < 1e-10);
    REQUIRE(o1.cycles.size() == o2.cycles.size());
    for (std::size_t k = 0; k < o1.cycles.size(); ++k) {
        CHECK(std::abs(o1.cycles[k].x_plus - (o2.cycles[k].x_plus + a)) < 1e-9);
        CHECK(std::abs(o1.cycles[k].a - o2.cycles[k].a) < 1e-10);
    }
}

TEST_CASE("free run at unit amplitude") {
    auto p = ModelParams::make(0.1);
    auto g = default_grid(p);
    CHECK(std::abs(std::abs(p.k_interval_upper * std::exp(p.mu_plus * g.x_start)) - 1e-4) < 1e-12);
    MarchControls c;
    c.stop_on_converged = false;
    auto o = march(p, 1.0, g, c);
    CHECK(o.classification == Classification::Overshoot);
    REQUIRE(o.cycles.size() >= 5);
    for (std::size_t k = 1; k < o.cycles.size(); ++k) {
        CHECK(o.cycles[k].a > o.cycles[k - 1].a);
        CHECK(o.cycles[k - 1].x_minus < o.cycles[k].x_plus);
    }
    for (auto& r : o.cycles) {
        CHECK(r.x_plus < r.x_zero);
        CHECK(r.x_zero < r.x_minus);
    }
    // independent quadrature of the nonlocal term agrees with the marcher
    CHECK(max_abs_residual(o.trajectory, 97) < 1e-9);
    // targeted run stops once the chosen cycle has completed
    c.target_cycles = 3;
    auto t = march(p, 1.0, g, c);
    CHECK(t.classification == Classification::Undershoot);
    CHECK(t.cycle_returns == 4);
}

TEST_CASE("end to end shot at lambda 0.1") {
    auto p = ModelParams::make(0.1);
    auto g = default_grid(p);
    auto r = shoot(p, g);
    CHECK(r.k_star >= 1.0);
    CHECK(r.k_star < p.k_interval_upper);
    CHECK(r.bracket.hi - r.bracket.lo < 1e-8);
    REQUIRE(!r.brackets.empty());
    CHECK(r.outcome.classification == Classification::Converged);
    const auto& tr = r.outcome.trajectory;
    CHECK(tr.v_values().back() < 1e-3);
    CHECK(tr.h_values().back() < 1e-3);
    for (std::size_t k = 1; k < r.outcome.cycles.size(); ++k) CHECK(r.outcome.cycles[k].a > r.outcome.cycles[k - 1].a);

    MarchControls c;
    c.target_cycles = r.target_cycles;
    c.stop_on_converged = false;
    auto lo = march(p, r.bracket.lo, g, c);
    auto hi = march(p, r.bracket.hi, g, c);
    CHECK(lo.classification != hi.classification);
    CHECK((lo.classification == Classification::Overshoot || lo.classification == Classification::Undershoot));
    CHECK((hi.classification == Classification::Overshoot || hi.classification == Classification::Undershoot));
    auto& b = r.brackets.front();
    CHECK(march(p, b.lo, g, c).classification != march(p, b.hi, g, c).classification);

    CHECK(max_abs_residual(tr, 53) < 1e-9);

    // an earlier start selects the same point of the fundamental interval
    LogGrid g2{g.x_start - 5.0, g.step, g.count + 250};
    auto r2 = shoot(p, g2);
    // the residual difference is the second-order error of the linear start, about 1e-4 relative
    CHECK(std::abs(r2.k_star - r.k_star) < 5e-4 * r.k_star);
    REQUIRE(!r2.outcome.cycles.empty());
    CHECK(std::abs(r2.outcome.cycles.back().a - r.outcome.cycles.back().a) < 1e-5);
}

TEST_CASE("invalid inputs") {
    auto p = ModelParams::make(0.1);
    CHECK_THROWS_AS(HistoryWeights(0.6, 0.02), DomainError);
    CHECK_THROWS_AS(HistoryWeights(0.1, 0.5), DomainError);
    HistoryWeights w(0.1, 0.02);
    CHECK_THROWS_AS(march(w, ModelParams::make(0.2), 1.0, LogGrid{-10.0, 0.02, 10}), DomainError);
    CHECK_THROWS_AS(march(w, p, 1.0, LogGrid{-10.0, 0.04, 10}), DomainError);
    ShootControls sc;
    sc.scan_points = 1;
    CHECK_THROWS_AS(shoot(p, default_grid(p), sc), DomainError);
    sc.scan_points = 65;
    CHECK_THROWS_AS(shoot(p, default_grid(p), sc), DomainError);
}

TEST_CASE("a budget that ends before the final peak cannot bracket") {
    auto p = ModelParams::make(0.1);
    auto g = default_grid(p);
    g.count = 2000;
    CHECK_THROWS_AS(shoot(p, g), SearchError);
}

TEST_CASE("thread budget") {
    CHECK(thread_budget(3) == 3);
    setenv("COAGSCALE_THREADS", "2", 1);
    CHECK(thread_budget() == 2);
    unsetenv("COAGSCALE_THREADS");
    CHECK(thread_budget() >= 1);
}
