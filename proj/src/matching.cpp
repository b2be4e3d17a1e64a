#include "matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "peaks.hpp"
#include "regime_ode.hpp"

namespace coagscale::matching {

namespace {

void check_small_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 0.5)) throw DomainError("matching: lambda must lie in (0, 1/2)");
}

}  // namespace

double energy_of(double lambda, double a) { return a * a / (2.0 * lambda); }

std::optional<CycleStep> advance_cycle(double lambda, double a_n, double x_plus, int n) {
    check_small_lambda(lambda);
    if (!(a_n > 0.0)) throw DomainError("advance_cycle: amplitude must be positive");
    if (a_n >= 1.0) return std::nullopt;
    CycleStep st;
    MatchRecord& r = st.record;
    r.n = n;
    r.a = a_n;
    r.x_plus = x_plus;
    r.energy = energy_of(lambda, a_n);
    r.x_zero = x_plus + std::log(2.0 * a_n / ((1.0 + a_n) * special::gamma(a_n) * lambda)) / a_n;
    r.x_minus = r.x_zero + std::log(-2.0 * a_n / ((1.0 - a_n) * special::gamma(-a_n) * lambda)) / a_n;
    st.next_a = regime::a_plus_from_a_minus(a_n);
    st.next_x_plus = r.x_minus + std::log((1.0 + st.next_a) / (1.0 - a_n)) / lambda;
    return st;
}

MatchingSequence run_recursion(double lambda, double a1, double x1_plus, int max_cycles) {
    check_small_lambda(lambda);
    if (!(a1 > 0.0 && a1 < 1.0)) throw DomainError("run_recursion: a1 must lie in (0, 1)");
    if (max_cycles < 1) throw DomainError("run_recursion: max_cycles must be positive");
    MatchingSequence seq;
    seq.lambda = lambda;
    double a = a1, xp = x1_plus;
    for (int n = 1; n <= max_cycles; ++n) {
        auto st = advance_cycle(lambda, a, xp, n);
        if (!st) {
            seq.terminated = true;
            break;
        }
        seq.records.push_back(st->record);
        a = st->next_a;
        xp = st->next_x_plus;
    }
    seq.next_a = a;
    seq.next_x_plus = xp;
    if (a >= 1.0) seq.terminated = true;
    return seq;
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::Ramp: return "ramp";
        case Regime::Peak: return "peak";
        case Regime::Decay: return "decay";
        case Regime::Valley: return "valley";
    }
    return "unknown";
}

double ramp_h(double a, double dx_plus) { return (1.0 + a) * std::exp(a * dx_plus); }

double peak_h(double lambda, double a, double dx_zero) {
    return peaks::eval_H(peaks::make_peak(a), dx_zero) / lambda;
}

double decay_h(double a, double dx_minus) { return (1.0 - a) * std::exp(-a * dx_minus); }

double valley_h(double lambda, double a_minus, double dx_minus) {
    // V grows at rate lambda from 1 - a_minus; U is the small root on the invariant curve through (1, 1 - a_minus)
    const double v = (1.0 - a_minus) * std::exp(lambda * dx_minus);
    const double e_hat = -lambda - (1.0 - a_minus) + std::log(1.0 - a_minus);
    const double c = std::min(-1.0, (e_hat + v - std::log(v)) / lambda);
    if (c == -1.0) return v;
    auto g = [c](double y) { return y - std::exp(y) - c; };
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto [lo, hi] = boost::math::tools::toms748_solve(g, c - 1.0, 0.0, g(c - 1.0), g(0.0), tol, iters);
    return std::exp(0.5 * (lo + hi)) * v;
}

CompositeValue composite_profile(const MatchingSequence& seq, double X) {
    if (seq.records.empty()) throw RangeError("composite_profile: empty sequence");
    const double lam = seq.lambda;
    const auto& rs = seq.records;
    const double x_end = seq.next_x_plus;
    if (!(X >= rs.front().x_plus) || !(X <= x_end)) throw RangeError("composite_profile: X outside the sequence span");
    std::size_t k = 0;
    while (k + 1 < rs.size() && X >= rs[k + 1].x_plus) ++k;
    const MatchRecord& r = rs[k];
    const double next_plus = k + 1 < rs.size() ? rs[k + 1].x_plus : x_end;
    CompositeValue out;
    out.cycle = r.n;
    const double b_peak = 0.5 * (r.x_plus + r.x_zero);
    const double b_decay = 0.5 * (r.x_zero + r.x_minus);
    const double b_valley = 0.5 * (r.x_minus + next_plus);
    if (X < b_peak) {
        out.regime = Regime::Ramp;
        out.h = ramp_h(r.a, X - r.x_plus);
    } else if (X < b_decay) {
        out.regime = Regime::Peak;
        out.h = peak_h(lam, r.a, X - r.x_zero);
    } else if (X < b_valley) {
        out.regime = Regime::Decay;
        out.h = decay_h(r.a, X - r.x_minus);
    } else {
        out.regime = Regime::Valley;
        out.h = valley_h(lam, r.a, X - r.x_minus);
    }
    return out;
}

double tail_prediction(double lambda, double x_n, double x) {
    if (!(x > 0.0) || !(x_n > 0.0)) throw DomainError("tail_prediction: x and x_n must be positive");
    double z = x / x_n;
    return 2.0 / lambda * z * std::exp(-z);
}

TailFit tail_fit(const profile::Trajectory& traj, double x_n, double lo, double hi) {
    if (!(x_n > 0.0) || !(hi > lo) || !(lo > 0.0)) throw DomainError("tail_fit: invalid window");
    const double lam = traj.params().lambda;
    double sz = 0, sy = 0, szz = 0, szy = 0;
    int n = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double z = std::exp(traj.grid().node(i)) / x_n;
        double hv = traj.h_values()[i];
        if (z < lo || z > hi || !(hv > 0.0)) continue;
        double y = std::log(hv * lam / 2.0) - std::log(z);
        sz += -z;
        sy += y;
        szz += z * z;
        szy += -z * y;
        ++n;
    }
    if (n < 3) throw RangeError("tail_fit: fewer than three samples in the window");
    TailFit f;
    f.points = n;
    double den = n * szz - sz * sz;
    f.slope = (n * szy - sz * sy) / den;
    f.intercept = (sy - f.slope * sz) / n;
    return f;
}

double spacing_from_amplitudes(double lambda, double a_n) {
    check_small_lambda(lambda);
    double next = regime::a_plus_from_a_minus(a_n);
    return std::log((1.0 + next) / (1.0 - a_n)) / lambda;
}

double spacing_from_period(double lambda, double energy) {
    check_small_lambda(lambda);
    return 2.0 * std::numbers::sqrt2 * std::sqrt(energy) / std::sqrt(lambda);
}

double spacing_linear(double lambda, double a_n) {
    check_small_lambda(lambda);
    return 2.0 * a_n / lambda;
}

double energy_increment(double lambda, double a_n) {
    double next = regime::a_plus_from_a_minus(a_n);
    return energy_of(lambda, next) - energy_of(lambda, a_n);
}

double energy_increment_predicted(double lambda, double energy) {
    return std::sqrt(lambda) * 4.0 * std::numbers::sqrt2 / 3.0 * std::pow(energy, 1.5);
}

}  // namespace coagscale::matching
