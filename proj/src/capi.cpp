#include "coagscale.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "adiabatic.hpp"
#include "errors.hpp"
#include "matching.hpp"
#include "peaks.hpp"
#include "profile.hpp"
#include "regime_ode.hpp"
#include "report.hpp"
#include "shooting.hpp"
#include "special.hpp"

namespace cs = coagscale;

struct cs_peak {
    cs::peaks::PeakSolution sol;
};

struct cs_trajectory {
    cs::profile::Trajectory traj;
};

struct cs_shot {
    cs::shooting::ShotResult result;
    double lambda;
};

struct cs_matching {
    cs::matching::MatchingSequence seq;
};

namespace {

thread_local std::string last_error;

cs_status fail(cs_status s, const char* what) {
    last_error = what;
    return s;
}

template <class F>
cs_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return CS_OK;
    } catch (const cs::DomainError& e) {
        return fail(CS_ERR_DOMAIN, e.what());
    } catch (const cs::NumericalError& e) {
        return fail(CS_ERR_NUMERICAL, e.what());
    } catch (const cs::RangeError& e) {
        return fail(CS_ERR_RANGE, e.what());
    } catch (const cs::IntegrityError& e) {
        return fail(CS_ERR_INTEGRITY, e.what());
    } catch (const cs::SearchError& e) {
        return fail(CS_ERR_SEARCH, e.what());
    } catch (const cs::IoError& e) {
        return fail(CS_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CS_ERR_INTERNAL, "unknown failure");
    }
}

#define CS_REQUIRE(p)                                         \
    do {                                                      \
        if (!(p)) return fail(CS_ERR_NULL, #p " is null"); \
    } while (0)

cs_classification to_c(cs::shooting::Classification c) {
    switch (c) {
        case cs::shooting::Classification::Overshoot: return CS_OVERSHOOT;
        case cs::shooting::Classification::Undershoot: return CS_UNDERSHOOT;
        case cs::shooting::Classification::Converged: return CS_CONVERGED;
        default: return CS_BUDGET;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* cs_last_error_message(void) { return last_error.c_str(); }

const char* cs_status_name(cs_status s) {
    switch (s) {
        case CS_OK: return "ok";
        case CS_ERR_DOMAIN: return "domain error";
        case CS_ERR_NUMERICAL: return "numerical error";
        case CS_ERR_RANGE: return "range error";
        case CS_ERR_INTEGRITY: return "integrity error";
        case CS_ERR_SEARCH: return "search error";
        case CS_ERR_IO: return "io error";
        case CS_ERR_NULL: return "null argument";
        default: return "internal error";
    }
}

const char* cs_version(void) { return "1.0.0"; }

void cs_string_free(char* s) { std::free(s); }

cs_status cs_dispersion(double lambda, cs_dispersion_info* out) {
    CS_REQUIRE(out);
    return guarded([&] {
        auto p = cs::special::ModelParams::make(lambda);
        *out = {p.lambda, p.h_lambda, p.mu_plus.real(), p.mu_plus.imag(),
                p.alpha,  p.beta,     p.k_interval_upper, std::abs(cs::special::psi(lambda, p.mu_plus))};
    });
}

cs_status cs_regime_period(double energy, double* out) {
    CS_REQUIRE(out);
    return guarded([&] { *out = cs::regime::period(energy); });
}

cs_status cs_regime_phi(double energy, double* out) {
    CS_REQUIRE(out);
    return guarded([&] { *out = cs::regime::phi(energy); });
}

cs_status cs_amplitude_map(double a_minus, double* a_plus) {
    CS_REQUIRE(a_plus);
    return guarded([&] { *a_plus = cs::regime::a_plus_from_a_minus(a_minus); });
}

cs_status cs_transition_length(double lambda, double a_minus, double a_plus, double* out) {
    CS_REQUIRE(out);
    return guarded([&] { *out = cs::regime::transition_length(lambda, a_minus, a_plus); });
}

cs_status cs_peak_create(double a, double kappa, cs_peak** out) {
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new cs_peak{cs::peaks::make_peak(a, kappa)}; });
}

void cs_peak_destroy(cs_peak* p) { delete p; }

cs_status cs_peak_eval(const cs_peak* p, double x_log, double* v, double* h, double* u) {
    CS_REQUIRE(p);
    return guarded([&] {
        auto r = cs::peaks::eval(p->sol, x_log);
        if (v) *v = r.v;
        if (h) *h = r.h;
        if (u) *u = r.u;
    });
}

cs_status cs_peak_convolution_residual(const cs_peak* p, double x, double* out) {
    CS_REQUIRE(p);
    CS_REQUIRE(out);
    return guarded([&] { *out = cs::peaks::convolution_residual(p->sol, x); });
}

cs_status cs_adiabatic_profile(double omega0, cs_cycle_profile* out) {
    CS_REQUIRE(out);
    return guarded([&] {
        auto p = cs::adiabatic::sigma_profile(omega0);
        auto s = cs::adiabatic::sandwich_check(omega0);
        cs_cycle_profile r{};
        r.omega0 = p.omega0;
        r.energy = p.energy;
        for (int i = 0; i < 4; ++i) {
            r.xi[i] = p.xi[i];
            r.sigma[i] = p.sigma[i];
        }
        r.phi = p.phi;
        r.margin = s.margin;
        r.sandwich_ok = s.ok ? 1 : 0;
        *out = r;
    });
}

cs_status cs_trajectory_constant(double lambda, double x_start, double step, size_t count, double value,
                                 cs_trajectory** out) {
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto p = cs::special::ModelParams::make(lambda);
        *out = new cs_trajectory{cs::profile::constant_trajectory(p, {x_start, step, count}, value)};
    });
}

cs_status cs_trajectory_read(const char* csv_path, const char* sidecar_path, cs_trajectory** out) {
    CS_REQUIRE(csv_path);
    CS_REQUIRE(sidecar_path);
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new cs_trajectory{cs::profile::read_trajectory(csv_path, sidecar_path)}; });
}

void cs_trajectory_destroy(cs_trajectory* t) { delete t; }

cs_status cs_trajectory_size(const cs_trajectory* t, size_t* out) {
    CS_REQUIRE(t);
    CS_REQUIRE(out);
    *out = t->traj.size();
    last_error.clear();
    return CS_OK;
}

cs_status cs_trajectory_node(const cs_trajectory* t, size_t i, cs_node* out) {
    CS_REQUIRE(t);
    CS_REQUIRE(out);
    return guarded([&] {
        if (i >= t->traj.size()) throw cs::RangeError("trajectory node index out of range");
        *out = {t->traj.grid().node(i), t->traj.h_values()[i], t->traj.u_values()[i], t->traj.v_values()[i]};
    });
}

cs_status cs_trajectory_eval_I(const cs_trajectory* t, double x_log, double* out) {
    CS_REQUIRE(t);
    CS_REQUIRE(out);
    return guarded([&] { *out = cs::profile::eval_I(t->traj, x_log); });
}

cs_status cs_trajectory_max_residual(const cs_trajectory* t, size_t stride, double* out) {
    CS_REQUIRE(t);
    CS_REQUIRE(out);
    return guarded([&] {
        if (stride == 0) throw cs::DomainError("stride must be positive");
        double worst = 0.0;
        for (double r : cs::profile::fixed_point_residual(t->traj, stride)) worst = std::max(worst, std::abs(r));
        *out = worst;
    });
}

cs_status cs_trajectory_write_csv(const cs_trajectory* t, const char* path) {
    CS_REQUIRE(t);
    CS_REQUIRE(path);
    return guarded([&] { cs::profile::write_csv(t->traj, path); });
}

cs_status cs_trajectory_write_sidecar(const cs_trajectory* t, const char* path) {
    CS_REQUIRE(t);
    CS_REQUIRE(path);
    return guarded([&] { cs::profile::write_sidecar(t->traj, path); });
}

cs_status cs_shoot_options_default(double lambda, cs_shoot_options* out) {
    CS_REQUIRE(out);
    return guarded([&] {
        auto p = cs::special::ModelParams::make(lambda);
        cs::shooting::ShootControls sc;
        auto g = cs::shooting::default_grid(p, 0.02);
        *out = {g.x_start, g.step, g.x_end(), sc.march.delta, sc.march.tolerance, sc.scan_points, 0u};
    });
}

cs_status cs_shoot(double lambda, const cs_shoot_options* opt, cs_shot** out) {
    CS_REQUIRE(opt);
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto p = cs::special::ModelParams::make(lambda);
        if (!(opt->step > 0.0) || !(opt->x_max > opt->x_start))
            throw cs::DomainError("shoot: grid needs step > 0 and x_max > x_start");
        if (!(opt->delta > 0.0) || !(opt->tolerance > 0.0)) throw cs::DomainError("shoot: tolerances must be positive");
        auto count = static_cast<std::size_t>(std::floor((opt->x_max - opt->x_start) / opt->step)) + 1;
        cs::shooting::ShootControls sc;
        sc.march.delta = opt->delta;
        sc.march.tolerance = opt->tolerance;
        sc.scan_points = opt->scan_points;
        sc.threads = opt->threads;
        auto res = cs::shooting::shoot(p, {opt->x_start, opt->step, count}, sc);
        *out = new cs_shot{std::move(res), lambda};
    });
}

void cs_shot_destroy(cs_shot* s) { delete s; }

cs_status cs_shot_summary_get(const cs_shot* s, cs_shot_summary* out) {
    CS_REQUIRE(s);
    CS_REQUIRE(out);
    const auto& r = s->result;
    *out = {s->lambda,           r.k_star,         r.bracket.lo, r.bracket.hi, r.target_cycles, r.bisection_steps,
            to_c(r.outcome.classification), r.outcome.terminal_x, r.outcome.cycles.size()};
    last_error.clear();
    return CS_OK;
}

cs_status cs_shot_cycle(const cs_shot* s, size_t i, cs_cycle* out) {
    CS_REQUIRE(s);
    CS_REQUIRE(out);
    const auto& cyc = s->result.outcome.cycles;
    if (i >= cyc.size()) return fail(CS_ERR_RANGE, "cycle index out of range");
    *out = {cyc[i].n, cyc[i].a, cyc[i].x_plus, cyc[i].x_zero, cyc[i].x_minus};
    last_error.clear();
    return CS_OK;
}

cs_status cs_shot_trajectory(const cs_shot* s, cs_trajectory** out) {
    CS_REQUIRE(s);
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new cs_trajectory{s->result.outcome.trajectory}; });
}

const char* cs_classification_name(cs_classification c) {
    switch (c) {
        case CS_OVERSHOOT: return "Overshoot";
        case CS_UNDERSHOOT: return "Undershoot";
        case CS_CONVERGED: return "Converged";
        default: return "Budget";
    }
}

cs_status cs_match_run(double lambda, double a1, double x1_plus, int max_cycles, cs_matching** out) {
    CS_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new cs_matching{cs::matching::run_recursion(lambda, a1, x1_plus, max_cycles)}; });
}

void cs_match_destroy(cs_matching* m) { delete m; }

cs_status cs_match_count(const cs_matching* m, size_t* out) {
    CS_REQUIRE(m);
    CS_REQUIRE(out);
    *out = m->seq.records.size();
    last_error.clear();
    return CS_OK;
}

cs_status cs_match_record_get(const cs_matching* m, size_t i, cs_match_record* out) {
    CS_REQUIRE(m);
    CS_REQUIRE(out);
    if (i >= m->seq.records.size()) return fail(CS_ERR_RANGE, "record index out of range");
    const auto& r = m->seq.records[i];
    *out = {r.n, r.a, r.x_plus, r.x_zero, r.x_minus, r.energy};
    last_error.clear();
    return CS_OK;
}

cs_status cs_match_terminated(const cs_matching* m, int* out) {
    CS_REQUIRE(m);
    CS_REQUIRE(out);
    *out = m->seq.terminated ? 1 : 0;
    last_error.clear();
    return CS_OK;
}

cs_status cs_match_range(const cs_matching* m, double* x_lo, double* x_hi) {
    CS_REQUIRE(m);
    CS_REQUIRE(x_lo);
    CS_REQUIRE(x_hi);
    if (m->seq.records.empty()) return fail(CS_ERR_RANGE, "empty matching sequence");
    *x_lo = m->seq.records.front().x_plus;
    *x_hi = m->seq.next_x_plus;
    last_error.clear();
    return CS_OK;
}

cs_status cs_match_composite(const cs_matching* m, double x_log, double* h, cs_regime* regime, int* cycle) {
    CS_REQUIRE(m);
    return guarded([&] {
        auto c = cs::matching::composite_profile(m->seq, x_log);
        if (h) *h = c.h;
        if (regime) *regime = static_cast<cs_regime>(static_cast<int>(c.regime));
        if (cycle) *cycle = c.cycle;
    });
}

const char* cs_regime_name(cs_regime r) {
    return cs::matching::to_string(static_cast<cs::matching::Regime>(static_cast<int>(r)));
}

cs_status cs_report_json(double lambda, const int* criteria, size_t count, char** json, int* all_pass) {
    CS_REQUIRE(json);
    *json = nullptr;
    return guarded([&] {
        cs::report::Options opt;
        opt.lambda = lambda;
        std::vector<int> sel;
        if (criteria) sel.assign(criteria, criteria + count);
        auto suite = cs::report::run(opt, sel);
        if (all_pass) {
            bool ok = true;
            for (const auto& c : suite.checks) ok = ok && c.pass;
            *all_pass = ok ? 1 : 0;
        }
        *json = dup_string(cs::report::to_json(suite, opt));
    });
}

}  // extern "C"
