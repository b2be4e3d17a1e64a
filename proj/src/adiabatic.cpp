#include "adiabatic.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "ode.hpp"
#include "regime_ode.hpp"

namespace coagscale::adiabatic {

namespace {

using S = ode::State<3>;

void rhs(const S& x, S& d, double) {
    double um1 = std::expm1(x[0]);
    d[0] = x[1];
    d[1] = -um1;
    d[2] = um1 * (um1 - x[1] * x[1]);
}

ode::EventIntegrator<3> make_integrator() {
    ode::EventIntegrator<3> integ(rhs, 1e-14, 1e-14, 1e-4);
    integ.set_max_step(0.05);
    return integ;
}

double upper_excess(double omega0, double w) {
    auto tp = regime::turning_points(0.5 * omega0 * omega0, w);
    return std::expm1(tp.log_u_plus);
}

double upper_excess_at_angle(double omega0, double th) {
    double c = std::cos(th);
    return std::expm1(regime::turning_points_at_gap(0.5 * omega0 * omega0 * c * c).log_u_plus);
}

double sigma_from(double omega0, double w_from) {
    double th0 = std::asin(std::clamp(w_from / omega0, -1.0, 1.0));
    auto f = [omega0](double th) {
        double w = omega0 * std::sin(th);
        return (upper_excess_at_angle(omega0, th) - w * w) * std::cos(th);
    };
    double err = 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return omega0 * GK::integrate(f, th0, std::numbers::pi / 2, 15, 1e-13, &err);
}

void check_omega0(double omega0) {
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw DomainError("omega0 must be positive");
}

}  // namespace

CycleProfile sigma_profile(double omega0) {
    check_omega0(omega0);
    CycleProfile p;
    p.omega0 = omega0;
    p.energy = 0.5 * omega0 * omega0;

    auto integ = make_integrator();
    auto g = [](double, const S& s) { return std::expm1(s[0]) - s[1] * s[1]; };
    auto y = [](double, const S& s) { return s[0]; };
    const std::array<ode::Event<3>, 4> stations = {
        ode::Event<3>{g, +1}, ode::Event<3>{g, -1}, ode::Event<3>{y, -1}, ode::Event<3>{y, +1}};

    S x = {0.0, omega0, 0.0};
    double t = 0.0;
    for (int k = 0; k < 4; ++k) {
        auto hit = integ.run(x, t, 1e7, {stations[k]});
        if (hit.which != 0) throw NumericalError("sigma_profile: station not reached");
        p.xi[k] = hit.t;
        p.sigma[k] = hit.x[2];
        if (k < 3) p.omega[k] = hit.x[1];
    }
    if (!(p.omega[0] > 0.0 && p.omega[1] < 0.0))
        throw NumericalError("sigma_profile: stations out of order");

    // omega_1 solves U+(omega) - 1 = omega^2 on (0, omega0)
    auto f = [omega0](double w) { return upper_excess(omega0, w) - w * w; };
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto r = boost::math::tools::toms748_solve(f, 0.0, omega0, tol, iters);
    double w1 = 0.5 * (r.first + r.second);
    p.sigma_by_omega[0] = sigma_from(omega0, w1);
    p.sigma_by_omega[1] = sigma_from(omega0, -w1);
    p.sigma_by_omega[2] = sigma_from(omega0, -omega0);
    p.phi = regime::phi(p.energy);
    return p;
}

std::vector<SigmaSample> sigma_path(double omega0, std::size_t n_samples) {
    check_omega0(omega0);
    if (n_samples < 2) throw DomainError("sigma_path: need at least two samples");
    double xi4 = sigma_profile(omega0).xi[3];
    std::vector<double> times(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) times[i] = xi4 * i / (n_samples - 1);
    std::vector<SigmaSample> out;
    out.reserve(n_samples);
    auto integ = make_integrator();
    S x = {0.0, omega0, 0.0};
    double t = 0.0;
    integ.run(x, t, xi4, {}, times, [&](double tt, const S& s) { out.push_back({tt, s[2]}); });
    if (out.size() < n_samples) out.push_back({t, x[2]});
    return out;
}

SandwichResult sandwich_check(double omega0, std::size_t n_samples) {
    auto p = sigma_profile(omega0);
    SandwichResult r;
    r.lower = std::min(p.sigma[0], p.sigma[2]);
    r.upper = std::max(p.sigma[1], p.sigma[3]);
    r.tolerance = 1e-8 * std::max(1.0, omega0 * omega0 * omega0);
    r.margin = std::numeric_limits<double>::infinity();
    for (const auto& s : sigma_path(omega0, n_samples))
        r.margin = std::min({r.margin, s.sigma - r.lower + r.tolerance, r.upper + r.tolerance - s.sigma});
    r.ok = r.margin >= 0.0;
    return r;
}

}  // namespace coagscale::adiabatic
