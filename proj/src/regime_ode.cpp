#include "regime_ode.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "ode.hpp"

namespace coagscale::regime {

namespace {

// expm1(y) - y without cancellation near 0
double em1my(double y) {
    if (std::abs(y) < 0.5) {
        double term = y * y / 2.0;
        double sum = term;
        for (int k = 3; k < 40; ++k) {
            term *= y / k;
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return std::expm1(y) - y;
}

// log1p(x) - x without cancellation near 0
double l1pmx(double x) {
    if (std::abs(x) < 0.1) {
        double p = x * x;
        double sum = 0.0;
        for (int k = 2; k < 60; ++k) {
            double term = p / k;
            sum += (k % 2 == 0) ? -term : term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            p *= x;
        }
        return sum;
    }
    return std::log1p(x) - x;
}

double solve_log_root(double s, bool upper) {
    if (s == 0.0) return 0.0;
    double lo, hi, guess;
    if (upper) {
        lo = 0.0;
        hi = std::min(std::sqrt(2.0 * s), std::log(2.0 * (1.0 + s)));
        guess = s < 1.0 ? std::sqrt(2.0 * s) * (1.0 - std::sqrt(2.0 * s) / 6.0) : std::log1p(s);
    } else {
        lo = -(s + 1.0);
        hi = -std::sqrt(2.0 * s);
        guess = s < 1.0 ? -std::sqrt(2.0 * s) * (1.0 + std::sqrt(2.0 * s) / 6.0) : -(s + 1.0);
    }
    guess = std::clamp(guess, lo, hi);
    auto f = [s](double y) { return std::make_pair(em1my(y) - s, std::expm1(y)); };
    boost::uintmax_t iters = 200;
    double y = boost::math::tools::newton_raphson_iterate(f, guess, lo, hi, 52, iters);
    return y;
}

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double err = 0.0;
    return GK::integrate(f, a, b, 15, tol, &err);
}

}  // namespace

double energy(double u, double omega) {
    if (!(u > 0.0)) throw DomainError("energy: U must be positive");
    return -std::log(u) + (u - 1.0) + 0.5 * omega * omega;
}

TurningPoints turning_points(double E, double omega) {
    double s = E - 0.5 * omega * omega;
    if (!(E >= 0.0) || !std::isfinite(E)) throw DomainError("turning_points: energy must be non-negative");
    if (s < 0.0) {
        if (s < -1e-14 * std::max(1.0, E))
            throw DomainError("turning_points: omega^2/2 exceeds the energy");
        s = 0.0;
    }
    return turning_points_at_gap(s);
}

TurningPoints turning_points_at_gap(double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("turning_points: gap must be non-negative");
    TurningPoints tp;
    tp.log_u_minus = solve_log_root(s, false);
    tp.log_u_plus = solve_log_root(s, true);
    tp.u_minus = std::exp(tp.log_u_minus);
    tp.u_plus = std::exp(tp.log_u_plus);
    return tp;
}

double period(double E) {
    if (!(E >= 0.0) || !std::isfinite(E)) throw DomainError("period: energy must be non-negative");
    if (E == 0.0) return 2.0 * std::numbers::pi;
    double ym = solve_log_root(E, false);
    double yp = solve_log_root(E, true);
    double eym = std::exp(ym);
    double eyp = std::exp(yp);
    // y = ym + t^2 on the left, y = yp - t^2 on the right
    auto left = [&](double t) {
        double d = t * t;
        double p = eym;
        if (d >= 1.0)
            p = (std::exp(ym + d) - eym) / d;
        else if (d > 0.0)
            p = eym * std::expm1(d) / d;
        return 2.0 / std::sqrt(1.0 - p);
    };
    auto right = [&](double t) {
        double d = t * t;
        double p = d == 0.0 ? eyp : -eyp * std::expm1(-d) / d;
        return 2.0 / std::sqrt(p - 1.0);
    };
    double tl = integrate(left, 0.0, std::sqrt(-ym), 1e-14);
    double tr = integrate(right, 0.0, std::sqrt(yp), 1e-14);
    return std::numbers::sqrt2 * (tl + tr);
}

double phi(double E) {
    if (!(E >= 0.0) || !std::isfinite(E)) throw DomainError("phi: energy must be non-negative");
    if (E == 0.0) return 0.0;
    double w0 = std::sqrt(2.0 * E);
    auto f = [&](double th) {
        double c = std::cos(th);
        double s = E * c * c;
        double yp = solve_log_root(s, true);
        double ym = solve_log_root(s, false);
        return (std::exp(yp) - std::exp(ym)) * c;
    };
    return 2.0 * w0 * integrate(f, 0.0, std::numbers::pi / 2, 1e-13);
}

OrbitMeasure measure_orbit(double E) {
    if (!(E > 0.0) || !std::isfinite(E)) throw DomainError("measure_orbit: energy must be positive");
    using S = ode::State<3>;
    auto rhs = [](const S& x, S& d, double) {
        double um1 = std::expm1(x[0]);
        d[0] = x[1];
        d[1] = -um1;
        d[2] = um1 * um1 - x[1] * x[1] * um1;
    };
    ode::EventIntegrator<3> integ(rhs, 1e-14, 1e-14, 1e-3);
    integ.set_max_step(0.1);
    S x = {solve_log_root(E, true), 0.0, 0.0};
    double t = 0.0;
    OrbitMeasure m;
    auto obs = [&](double, const S& s) {
        double e = em1my(s[0]) + 0.5 * s[1] * s[1];
        m.max_energy_drift = std::max(m.max_energy_drift, std::abs(e - E) / E);
    };
    std::vector<ode::Event<3>> ev = {{[](double, const S& s) { return s[1]; }, -1}};
    auto hit = integ.run(x, t, 1e6, ev, {}, {}, obs);
    if (hit.which != 0) throw NumericalError("measure_orbit: orbit did not close");
    m.period = hit.t;
    m.phi = hit.x[2];
    return m;
}

double energy_rate(double lambda, double u, double omega) {
    double um1 = u - 1.0;
    return std::sqrt(lambda) * (um1 * um1 - omega * omega * um1);
}

PerturbedPath integrate_perturbed(double lambda, double u0, double omega0, double xi_span,
                                  double sample_spacing, double exit_threshold) {
    if (!(lambda >= 0.0 && lambda < 0.5)) throw DomainError("integrate_perturbed: lambda must lie in [0, 1/2)");
    if (!(u0 > 0.0)) throw DomainError("integrate_perturbed: U0 must be positive");
    if (!(xi_span > 0.0) || !(sample_spacing > 0.0))
        throw DomainError("integrate_perturbed: span and spacing must be positive");
    using S = ode::State<2>;
    double sl = std::sqrt(lambda);
    auto rhs = [sl](const S& x, S& d, double) {
        double um1 = std::expm1(x[0]);
        d[0] = x[1] + sl * um1;
        d[1] = -um1 * (1.0 + sl * x[1]);
    };
    ode::EventIntegrator<2> integ(rhs, 1e-13, 1e-13, 1e-3);
    integ.set_max_step(0.1);
    std::vector<ode::Event<2>> ev;
    if (lambda > 0.0) {
        double ycap = std::log(10.0 / lambda);
        ev.push_back({[ycap](double, const S& s) { return s[0] - ycap; }, +1});
        ev.push_back({[lambda, exit_threshold](double, const S& s) {
                          double e = em1my(s[0]) + 0.5 * s[1] * s[1];
                          return lambda * (1.0 + e) - exit_threshold;
                      },
                      +1});
    }
    PerturbedPath path;
    std::vector<double> times;
    for (double t = 0.0; t <= xi_span * (1 + 1e-12); t += sample_spacing) times.push_back(std::min(t, xi_span));
    auto obs = [&](double t, const S& s) {
        double u = std::exp(s[0]);
        path.samples.push_back({t, u, s[1], em1my(s[0]) + 0.5 * s[1] * s[1]});
    };
    S x = {std::log(u0), omega0};
    double t = 0.0;
    auto hit = integ.run(x, t, xi_span, ev, times, obs);
    if (hit.which >= 0) {
        path.regime_exit = true;
        path.exit_reason = hit.which == 0 ? "U exceeded 10/lambda" : "lambda*(1+E) reached the validity threshold";
        obs(hit.t, hit.x);
    } else if (path.samples.empty() || path.samples.back().xi < t) {
        obs(t, x);
    }
    return path;
}

CycleGain perturbed_cycle_gain(double lambda, double E0) {
    if (!(lambda >= 0.0 && lambda < 0.5)) throw DomainError("perturbed_cycle_gain: lambda must lie in [0, 1/2)");
    if (!(E0 > 0.0)) throw DomainError("perturbed_cycle_gain: energy must be positive");
    using S = ode::State<2>;
    double sl = std::sqrt(lambda);
    auto rhs = [sl](const S& x, S& d, double) {
        double um1 = std::expm1(x[0]);
        d[0] = x[1] + sl * um1;
        d[1] = -um1 * (1.0 + sl * x[1]);
    };
    ode::EventIntegrator<2> integ(rhs, 1e-13, 1e-13, 1e-3);
    integ.set_max_step(0.1);
    std::vector<ode::Event<2>> ev = {{[](double, const S& s) { return s[1]; }, -1}};
    S x = {solve_log_root(E0, true), 0.0};
    double t = 0.0;
    auto hit = integ.run(x, t, 1e6, ev);
    if (hit.which != 0) throw NumericalError("perturbed_cycle_gain: cycle did not complete");
    return {E0, em1my(hit.x[0]) + 0.5 * hit.x[1] * hit.x[1], hit.t};
}

double intermediate_invariant(double lambda, double u, double v) {
    if (!(u > 0.0 && v > 0.0)) throw DomainError("intermediate_invariant: U and V must be positive");
    return lambda * (std::log(u) - u) - v + std::log(v);
}

IntermediatePath integrate_intermediate(double lambda, double u0, double v0, double x_span,
                                        double sample_spacing, bool stop_on_return) {
    if (!(lambda > 0.0 && lambda < 0.5)) throw DomainError("integrate_intermediate: lambda must lie in (0, 1/2)");
    if (!(u0 > 0.0 && v0 > 0.0)) throw DomainError("integrate_intermediate: U0 and V0 must be positive");
    if (!(x_span > 0.0) || !(sample_spacing > 0.0))
        throw DomainError("integrate_intermediate: span and spacing must be positive");
    using S = ode::State<2>;
    auto rhs = [lambda](const S& x, S& d, double) {
        d[0] = std::expm1(x[1]);
        d[1] = -lambda * std::expm1(x[0]);
    };
    ode::EventIntegrator<2> integ(rhs, 1e-14, 1e-14, 1e-3);
    std::vector<ode::Event<2>> ev;
    if (stop_on_return) ev.push_back({[](double, const S& s) { return s[0]; }, +1});
    IntermediatePath path;
    std::vector<double> times;
    for (double t = 0.0; t <= x_span * (1 + 1e-12); t += sample_spacing) times.push_back(std::min(t, x_span));
    auto obs = [&](double t, const S& s) {
        double u = std::exp(s[0]);
        double v = std::exp(s[1]);
        path.samples.push_back({t, u, v, lambda * (s[0] - u) - v + s[1]});
    };
    S x = {std::log(u0), std::log(v0)};
    double t = 0.0;
    auto hit = integ.run(x, t, x_span, ev, times, obs);
    if (hit.which == 0) {
        path.returned = true;
        path.return_x = hit.t;
        path.return_v = std::exp(hit.x[1]);
        obs(hit.t, hit.x);
    } else if (path.samples.empty() || path.samples.back().x < t) {
        obs(t, x);
    }
    return path;
}

double amplitude_map_residual(double a_minus, double a_plus) {
    return l1pmx(a_plus) - l1pmx(-a_minus);
}

double a_plus_from_a_minus(double a_minus) {
    if (!(a_minus >= 0.0 && a_minus < 1.0)) throw DomainError("a_plus_from_a_minus: a_minus must lie in [0, 1)");
    if (a_minus == 0.0) return 0.0;
    double c = l1pmx(-a_minus);
    auto f = [c](double a) { return l1pmx(a) - c; };
    double lo = 0.0;
    double hi = 2.0 * a_minus + 1.0;
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("a_plus_from_a_minus: bracket expansion failed");
    }
    for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    double a = 0.5 * (lo + hi);
    for (int k = 0; k < 3; ++k) {
        double d = -a / (1.0 + a);
        double na = a - f(a) / d;
        if (!(na > 0.0)) break;
        a = na;
    }
    return a;
}

double transition_length(double lambda, double a_minus, double a_plus) {
    if (!(lambda > 0.0)) throw DomainError("transition_length: lambda must be positive");
    if (!(a_minus < 1.0 && a_plus > -1.0)) throw DomainError("transition_length: amplitudes out of range");
    return (std::log1p(a_plus) - std::log1p(-a_minus)) / lambda;
}

}  // namespace coagscale::regime
