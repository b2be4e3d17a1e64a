#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "errors.hpp"

namespace coagscale::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct Event {
    std::function<double(double, const State<N>&)> g;
    int direction = 0;  // +1 upward, -1 downward, 0 either
};

template <std::size_t N>
struct Hit {
    int which = -1;
    double t = 0.0;
    State<N> x{};
};

// Adaptive RKF78 with event location and dense sampling by re-stepping
// from the last accepted state.
template <std::size_t N>
class EventIntegrator {
public:
    using state_type = State<N>;
    using Rhs = std::function<void(const state_type&, state_type&, double)>;
    using Observer = std::function<void(double, const state_type&)>;

    EventIntegrator(Rhs rhs, double abs_tol, double rel_tol, double first_step = 1e-3)
        : rhs_(std::move(rhs)), abs_tol_(abs_tol), rel_tol_(rel_tol), dt_(first_step) {}

    void set_max_steps(long n) { max_steps_ = n; }
    void set_max_step(double h) { max_step_ = h; }

    // Integrates from (t, x) towards t_end. Stops at the first event whose
    // sign change matches its direction. Sample times must be increasing.
    Hit<N> run(state_type& x, double& t, double t_end, const std::vector<Event<N>>& events,
               const std::vector<double>& samples = {}, const Observer& sample_obs = {},
               const Observer& step_obs = {}) {
        namespace odeint = boost::numeric::odeint;
        auto ctrl = odeint::make_controlled(abs_tol_, rel_tol_, stepper_type());
        auto sys = [this](const state_type& s, state_type& d, double tt) { rhs_(s, d, tt); };

        std::vector<double> gprev(events.size());
        for (std::size_t k = 0; k < events.size(); ++k) gprev[k] = events[k].g(t, x);
        std::size_t next_sample = 0;
        while (next_sample < samples.size() && samples[next_sample] < t) ++next_sample;
        if (next_sample < samples.size() && samples[next_sample] == t && sample_obs) {
            sample_obs(t, x);
            ++next_sample;
        }

        long steps = 0;
        while (t < t_end) {
            if (++steps > max_steps_) throw NumericalError("ODE integration exceeded its step budget");
            double dt = std::min({dt_, t_end - t, max_step_});
            state_type x0 = x;
            double t0 = t;
            state_type xn = x;
            double tn = t;
            int fails = 0;
            for (;;) {
                if (ctrl.try_step(sys, xn, tn, dt) == odeint::success) {
                    bool finite = true;
                    for (double v : xn) finite = finite && std::isfinite(v);
                    if (finite) break;
                    dt = 0.25 * (tn - t0);
                    xn = x0;
                    tn = t0;
                }
                if (++fails > 200 || dt < 1e-14 * std::max(1.0, std::abs(t)))
                    throw NumericalError("ODE step size underflow");
            }
            dt_ = dt;
            double h = tn - t0;

            // earliest matching event in this step
            int best = -1;
            double best_tau = h;
            for (std::size_t k = 0; k < events.size(); ++k) {
                double gn = events[k].g(tn, xn);
                if (crossed(gprev[k], gn, events[k].direction)) {
                    double tau = locate(sys, x0, t0, h, events[k], gprev[k], gn);
                    if (best < 0 || tau < best_tau) {
                        best = static_cast<int>(k);
                        best_tau = tau;
                    }
                }
                gprev[k] = gn;
            }
            double t_stop = best >= 0 ? t0 + best_tau : tn;
            while (sample_obs && next_sample < samples.size() && samples[next_sample] <= t_stop) {
                double ts = samples[next_sample++];
                sample_obs(ts, step_from(sys, x0, t0, ts - t0));
            }
            if (best >= 0) {
                x = step_from(sys, x0, t0, best_tau);
                t = t_stop;
                if (step_obs) step_obs(t, x);
                return {best, t, x};
            }
            x = xn;
            t = tn;
            if (step_obs) step_obs(t, x);
        }
        return {-1, t, x};
    }

private:
    using stepper_type = boost::numeric::odeint::runge_kutta_fehlberg78<state_type>;

    static bool crossed(double a, double b, int dir) {
        if (dir > 0) return a < 0.0 && b >= 0.0;
        if (dir < 0) return a > 0.0 && b <= 0.0;
        return (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0);
    }

    template <class Sys>
    static state_type step_from(Sys& sys, const state_type& x0, double t0, double tau) {
        state_type x = x0;
        if (tau > 0.0) stepper_type().do_step(sys, x, t0, tau);
        return x;
    }

    template <class Sys>
    static double locate(Sys& sys, const state_type& x0, double t0, double h, const Event<N>& ev,
                         double g0, double g1) {
        auto f = [&](double tau) {
            if (tau <= 0.0) return g0;
            return ev.g(t0 + tau, step_from(sys, x0, t0, tau));
        };
        if (g1 == 0.0) {
            // root sits on the step end; still refine in case of a touch
            return h;
        }
        boost::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(52);
        auto r = boost::math::tools::toms748_solve(f, 0.0, h, g0, g1, tol, iters);
        return 0.5 * (r.first + r.second);
    }

    Rhs rhs_;
    double abs_tol_;
    double rel_tol_;
    double dt_;
    double max_step_ = std::numeric_limits<double>::infinity();
    long max_steps_ = 10'000'000;
};

}  // namespace coagscale::ode
