#include "peaks.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "errors.hpp"
#include "special.hpp"

namespace coagscale::peaks {

namespace {

constexpr double kPi = std::numbers::pi;

double wedge_limit(double a) { return std::min(kPi / a, kPi); }

void check_solution(const PeakSolution& s) {
    if (!(s.a > 0.0 && s.a < 2.0)) throw DomainError("peak: a must lie in (0, 2)");
    if (!(s.kappa > 0.0) || !std::isfinite(s.kappa)) throw DomainError("peak: kappa must be positive");
    if (!(s.theta0 > kPi / 2 && s.theta0 < wedge_limit(s.a)))
        throw DomainError("peak: contour angle outside (pi/2, min(pi/a, pi))");
    if (!(s.contour_radius > 0.0)) throw DomainError("peak: contour radius must be positive");
    if (s.quadrature_nodes < 16) throw DomainError("peak: too few quadrature nodes");
}

struct Sums {
    cplx v;
    cplx h;
    cplx u;
};


}  // namespace

PeakSolution make_peak(double a, double kappa, double theta0) {
    PeakSolution s;
    s.a = a;
    s.kappa = kappa;
    if (!(a > 0.0 && a < 2.0)) throw DomainError("peak: a must lie in (0, 2)");
    s.theta0 = theta0 > 0.0 ? theta0 : 0.5 * (kPi / 2 + wedge_limit(a));
    check_solution(s);
    return s;
}

cplx laplace_symbol(double a, double kappa, cplx zeta) {
    if (zeta == 0.0) throw DomainError("laplace_symbol: zeta = 0");
    cplx za = std::pow(zeta, a);
    if (std::abs(za + kappa) < 1e-12) throw DomainError("laplace_symbol: too close to a pole");
    return (1.0 + a * (za - kappa) / (za + kappa)) / zeta;
}

PeakValue eval_closed_form(double kappa, double X) {
    if (!(kappa > 0.0)) throw DomainError("peak: kappa must be positive");
    double x = kappa * std::exp(X);
    double ex = std::exp(-x);
    PeakValue p;
    p.v = 2.0 * ex;
    p.h = 2.0 * x * ex;
    // (1 - (1+x)e^{-x}) / x, series for small x
    double g;
    if (x < 1e-3)
        g = x / 2.0 - x * x / 3.0 + x * x * x / 8.0;
    else
        g = -(std::expm1(-x) + x * ex) / x;
    p.u = 2.0 * g;
    return p;
}

PeakValue eval_contour(const PeakSolution& sol, double X) {
    check_solution(sol);
    const double a = sol.a;
    const double mu = sol.contour_radius;
    const double alpha = sol.theta0 - kPi / 2;
    const double c = sol.kappa * std::exp(a * X);
    if (std::isnan(c)) throw DomainError("peak: X is not a number");
    if (c == 0.0 || std::isinf(c)) {
        PeakValue lim;
        lim.v = c == 0.0 ? 1.0 + a : 1.0 - a;
        return lim;
    }

    // zeta(u) = mu (1 - sin(alpha - i u)); truncate where |e^zeta| < 1e-18
    const double umax = std::acosh((1.0 + 42.0 / mu) / std::sin(alpha));
    // for c >= 1 the U integrand drops its exactly cancelling c -> infinity part
    const bool large_c = c >= 1.0;
    struct Acc {
        Sums s{};
        double l1v = 0.0, l1h = 0.0, l1u = 0.0;
    };
    auto term = [&](double u, Acc& acc) {
        cplx w(alpha, -u);
        cplx z = mu * (1.0 - std::sin(w));
        cplx dz = mu * std::cos(w);  // d zeta = i dz du, the i cancels 1/(2 pi i)
        cplx ez = std::exp(z) * dz;
        cplx za = std::pow(z, a);
        cplx den = za + c;
        cplx tv = (za - c) / den * ez / z;
        cplx th = za / z * ez / (den * den);
        cplx tu = large_c ? ez * (z - 1.0) * za / (z * z * den) : ez * (z - 1.0) / (z * z * den);
        acc.s.v += tv;
        acc.s.h += th;
        acc.s.u += tu;
        acc.l1v += std::abs(tv);
        acc.l1h += std::abs(th);
        acc.l1u += std::abs(tu);
    };
    auto accumulate = [&](double h, double offset, Acc& acc) {
        int n = 0;
        for (double u = offset; u <= umax; u += h) {
            term(u, acc);
            ++n;
            if (u != 0.0) {
                term(-u, acc);
                ++n;
            }
        }
        return n;
    };
    const double fv = a / (2 * kPi);
    const double fh = 2.0 * a * a * c / (2 * kPi);
    const double fu = large_c ? -2.0 * a / (2 * kPi) : 2.0 * a * c / (2 * kPi);
    auto scaled = [&](const Acc& acc, double step) {
        Sums r;
        r.v = 1.0 + fv * step * acc.s.v;
        r.h = fh * step * acc.s.h;
        r.u = fu * step * acc.s.u;
        return r;
    };
    auto close = [](cplx x, cplx y, double l1) {
        double d = std::abs(x - y);
        return d <= 1e-13 * std::abs(x) || d <= 1e-15 * l1;
    };

    double h = 0.5;
    Acc raw;
    int nodes = accumulate(h, 0.0, raw);
    Sums prev = scaled(raw, h);
    for (;;) {
        nodes += accumulate(h, 0.5 * h, raw);
        h *= 0.5;
        Sums cur = scaled(raw, h);
        bool done = h <= 0.125 && std::abs(cur.v - prev.v) <= 1e-13 * std::max(1.0, std::abs(cur.v)) &&
                    close(cur.h, prev.h, std::abs(fh) * h * raw.l1h) &&
                    close(cur.u, prev.u, std::abs(fu) * h * raw.l1u);
        prev = cur;
        if (done) break;
        if (nodes > sol.quadrature_nodes) throw NumericalError("peak: contour quadrature did not converge");
    }
    PeakValue p;
    p.v = prev.v.real();
    p.h = prev.h.real();
    p.u = prev.u.real();
    p.imag_residue = std::max({std::abs(prev.v.imag()), std::abs(prev.h.imag()), std::abs(prev.u.imag())});
    p.nodes = nodes;
    return p;
}

PeakValue eval(const PeakSolution& sol, double X) {
    if (sol.a == 1.0) {
        check_solution(sol);
        return eval_closed_form(sol.kappa, X);
    }
    return eval_contour(sol, X);
}

double eval_V(const PeakSolution& sol, double X) { return eval(sol, X).v; }
double eval_H(const PeakSolution& sol, double X) { return eval(sol, X).h; }
double eval_U(const PeakSolution& sol, double X) { return eval(sol, X).u; }

double convolution_residual(const PeakSolution& sol, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("convolution_residual: x must be positive");
    double lhs = -x * eval_H(sol, std::log(x));
    auto f = [&](double y, double yc) {
        // past the midpoint yc holds x - y without cancellation
        double rest = yc > 0.0 ? yc : x - y;
        if (y <= 0.0 || rest <= 0.0) return 0.0;
        return eval_H(sol, std::log(y)) * eval_V(sol, std::log(rest));
    };
    boost::math::quadrature::tanh_sinh<double> ts(12);
    double err = 0.0;
    double rhs = -ts.integrate(f, 0.0, x, 1e-12, &err);
    return lhs - rhs;
}

double growth_coefficient(double a) {
    if (!(a > 0.0 && a < 2.0)) throw DomainError("growth_coefficient: a must lie in (0, 2)");
    return 2.0 * a / special::gamma(a);
}

DecayCoefficients decay_coefficients(double a) {
    if (!(a > 0.0 && a < 2.0)) throw DomainError("decay_coefficients: a must lie in (0, 2)");
    if (a == 1.0) throw DomainError("decay_coefficients: the decay constant is undefined at a = 1");
    return {2.0 * a / special::gamma(a), -2.0 * a / special::gamma(-a)};
}

}  // namespace coagscale::peaks
