#include "shooting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"

namespace coagscale::shooting {

namespace {

using GL = boost::math::quadrature::gauss<double, 8>;

double involution(double r) {
    if (r <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(-std::expm1(-r));
}

// Gauss-Legendre nodes and weights mapped to [a, b].
template <class F>
void for_each_node(double a, double b, F&& f) {
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] == 0.0) {
            f(mid, half * w[k]);
            continue;
        }
        f(mid - half * x[k], half * w[k]);
        f(mid + half * x[k], half * w[k]);
    }
}

// moments of e^{rate r} l_m((r - r0)/h) over [a, b] inside the cell starting at r0
void cell_moments(double rate, double r0, double h, double a, double b, double out[4]) {
    std::fill(out, out + 4, 0.0);
    if (!(b > a)) return;
    for_each_node(a, b, [&](double r, double w) {
        double l[4];
        profile::cubic_weights((r - r0) / h, l);
        double e = w * std::exp(rate * r);
        for (int m = 0; m < 4; ++m) out[m] += e * l[m];
    });
}

double cubic_at(const double* cur, double theta) {
    double w[4];
    profile::cubic_weights(theta, w);
    return w[0] * cur[0] + w[1] * cur[-1] + w[2] * cur[-2] + w[3] * cur[-3];
}

}  // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Overshoot: return "Overshoot";
        case Classification::Undershoot: return "Undershoot";
        case Classification::Converged: return "Converged";
        case Classification::Budget: return "Budget";
    }
    return "Unknown";
}

HistoryWeights::HistoryWeights(double lambda, double step) : lambda_(lambda), step_(step) {
    special::check_lambda(lambda);
    if (!(step > 0.0) || step > 0.25) throw DomainError("HistoryWeights: step must lie in (0, 0.25]");
    const double h = step;
    const double rs = -(1.0 - lambda), rt = lambda;
    const double r_max = profile::history_depth(lambda, 2.0 / lambda);
    const std::size_t nq = static_cast<std::size_t>(std::ceil(r_max / h));
    ncol_ = nq + 3;
    near_ = static_cast<std::size_t>(std::ceil(std::log(2.0) / h)) + 4;
    dense_.assign(near_ * ncol_, 0.0);
    cross_.assign((ncol_ - near_) * near_, 0.0);

    std::vector<double> ms(4 * nq), mt(4 * nq);
    for (std::size_t q = 0; q < nq; ++q) {
        double r0 = q * h;
        cell_moments(rs, r0, h, r0, r0 + h, &ms[4 * q]);
        cell_moments(rt, r0, h, r0, r0 + h, &mt[4 * q]);
    }

    auto add = [&](std::size_t j, std::size_t k, double val) {
        if (j < near_) {
            dense_[j * ncol_ + k] += val;
        } else {
            if (k >= near_) throw NumericalError("HistoryWeights: weight outside the expected band");
            cross_[(j - near_) * near_ + k] += val;
        }
    };

    for (std::size_t qs = 0; qs < nq; ++qs) {
        const double s0 = qs * h, s1 = s0 + h;
        for (std::size_t qt = 0; qt < nq; ++qt) {
            const double t0 = qt * h, t1 = t0 + h;
            if (std::exp(-s0) + std::exp(-t0) < 1.0) break;
            double c[4][4] = {};
            if (std::exp(-s1) + std::exp(-t1) >= 1.0) {
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) c[a][b] = ms[4 * qs + a] * mt[4 * qt + b];
            } else {
                // s below sa keeps the whole t cell; between sa and sb the t range ends at L(s)
                const double sa = involution(t1), sb = involution(t0);
                double full[4];
                cell_moments(rs, s0, h, s0, std::min(s1, sa), full);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) c[a][b] += full[a] * mt[4 * qt + b];
                const double lo = std::max(s0, sa), hi = std::min(s1, sb);
                if (hi > lo) {
                    for_each_node(lo, hi, [&](double s, double w) {
                        double l[4], g[4];
                        profile::cubic_weights((s - s0) / h, l);
                        double u = std::clamp(involution(s), t0, t1);
                        cell_moments(rt, t0, h, t0, u, g);
                        double e = w * std::exp(rs * s);
                        for (int a = 0; a < 4; ++a)
                            for (int b = 0; b < 4; ++b) c[a][b] += e * l[a] * g[b];
                    });
                }
            }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) add(qs + a, qt + b, c[a][b]);
        }
    }

    dense_end_.assign(near_, 0);
    for (std::size_t j = 0; j < near_; ++j)
        for (std::size_t k = ncol_; k-- > 0;)
            if (dense_[j * ncol_ + k] != 0.0) {
                dense_end_[j] = k + 1;
                break;
            }
    cross_end_.assign(ncol_ - near_, 0);
    for (std::size_t j = near_; j < ncol_; ++j)
        for (std::size_t k = near_; k-- > 0;)
            if (cross_[(j - near_) * near_ + k] != 0.0) {
                cross_end_[j - near_] = k + 1;
                break;
            }
    col0_.assign(ncol_, 0.0);
    for (std::size_t k = 1; k < ncol_; ++k) col0_[k] = weight(0, k) + weight(k, 0);
}

double HistoryWeights::weight(std::size_t j, std::size_t k) const {
    if (j >= ncol_ || k >= ncol_) return 0.0;
    if (j < near_) return dense_[j * ncol_ + k];
    if (k < near_) return cross_[(j - near_) * near_ + k];
    return 0.0;
}

double HistoryWeights::total() const {
    double s = 0.0;
    for (double w : dense_) s += w;
    for (double w : cross_) s += w;
    return s;
}

void HistoryWeights::split(const double* cur, double& p, double& q, double& r) const {
    double acc = 0.0;
    for (std::size_t j = 1; j < near_; ++j) {
        const double* row = &dense_[j * ncol_];
        double inner = 0.0;
        for (std::size_t k = 1; k < dense_end_[j]; ++k) inner += row[k] * cur[-static_cast<long>(k)];
        acc += inner * cur[-static_cast<long>(j)];
    }
    for (std::size_t j = near_; j < ncol_; ++j) {
        const double* row = &cross_[(j - near_) * near_];
        double inner = 0.0;
        for (std::size_t k = 1; k < cross_end_[j - near_]; ++k) inner += row[k] * cur[-static_cast<long>(k)];
        acc += inner * cur[-static_cast<long>(j)];
    }
    double lin = 0.0;
    for (std::size_t k = 1; k < ncol_; ++k) lin += col0_[k] * cur[-static_cast<long>(k)];
    p = acc;
    q = lin;
    r = dense_[0];
}

double default_x_start(const ModelParams& params, double level) {
    return (std::log(level) - std::log(params.k_interval_upper)) / params.mu_plus.real();
}

LogGrid default_grid(const ModelParams& params, double step, double x_max) {
    double x0 = default_x_start(params);
    if (x_max <= 0.0) x_max = params.lambda >= 0.075 ? 500.0 : 800.0;
    if (x_max <= x0) throw DomainError("default_grid: x_max must exceed the start of the grid");
    std::size_t count = static_cast<std::size_t>(std::floor((x_max - x0) / step)) + 1;
    return LogGrid{x0, step, count};
}

ShotOutcome march(const ModelParams& params, cplx K, const LogGrid& grid, const MarchControls& controls) {
    HistoryWeights w(params.lambda, grid.step);
    return march(w, params, K, grid, controls);
}

ShotOutcome march(const HistoryWeights& weights, const ModelParams& params, cplx K, const LogGrid& grid,
                  const MarchControls& ctl) {
    grid.validate();
    if (weights.lambda() != params.lambda || weights.step() != grid.step)
        throw DomainError("march: weights were built for a different lambda or step");
    if (!(ctl.delta > 0.0) || !(ctl.tolerance > 0.0) || !(ctl.hysteresis >= 0.0))
        throw DomainError("march: tolerances must be positive");
    const double lam = params.lambda, h = grid.step;
    const double hl = params.h_lambda, c = hl / (lam * (1.0 - lam));
    const double window = ctl.converged_window > 0.0 ? ctl.converged_window : 2.0 / lam;
    const std::size_t nc = weights.columns();
    const std::size_t n = grid.count;

    std::vector<double> H(nc + n), U(4 + n), V(4 + n);
    for (std::size_t m = 1; m <= nc; ++m) {
        auto s = profile::prehistory(params, K, grid.x_start - static_cast<double>(m) * h);
        H[nc - m] = s.h;
        if (m <= 4) {
            U[4 - m] = s.u;
            V[4 - m] = s.v;
        }
    }

    ShotOutcome out;
    bool done = false;
    std::size_t last = 0;

    // cycle tracking on U crossing 1
    bool below = false;
    bool side_known = false;
    double ext = 1.0;
    double cand_x = 0.0, cand_v = 0.0;
    bool cycle_open = false;
    bool awaiting_return = false;
    CycleRecord rec;
    std::size_t peak_i = 0;
    double peak_h = -1.0;
    double conv_start = std::numeric_limits<double>::quiet_NaN();
    const double floor_gap = 1e-12;

    for (std::size_t i = 0; i < n && !done; ++i) {
        const double X = grid.node(i);
        double* cur = &H[nc + i];
        double p, q, r;
        weights.split(cur, p, q, r);

        double au, bu, av, bv;
        if (i == 0) {
            auto s = profile::prehistory(params, K, X);
            au = s.u;
            av = s.v;
            bu = bv = 0.0;
        } else {
            const double* hh = cur;
            const double* uu = &U[4 + i];
            const double* vv = &V[4 + i];
            auto fu = [&](int k) { return (1.0 - lam) * (hh[-k] - uu[-k]); };
            auto fv = [&](int k) { return lam * (vv[-k] - hh[-k]); };
            const double ku = 9.0 * h * (1.0 - lam) / 24.0, kv = 9.0 * h * lam / 24.0;
            au = (uu[-1] + h / 24.0 * (19.0 * fu(1) - 5.0 * fu(2) + fu(3))) / (1.0 + ku);
            bu = ku / (1.0 + ku);
            av = (vv[-1] + h / 24.0 * (19.0 * fv(1) - 5.0 * fv(2) + fv(3))) / (1.0 - kv);
            bv = -kv / (1.0 - kv);
        }

        double hg = 4.0 * cur[-1] - 6.0 * cur[-2] + 4.0 * cur[-3] - cur[-4];
        if (!(hg > 0.0)) hg = cur[-1];
        double prev_diff = std::numeric_limits<double>::infinity();
        double hn = hg;
        for (int it = 0;; ++it) {
            hn = c * (au + bu * hg) * (av + bv * hg) + hl * (p + q * hg + r * hg * hg);
            double diff = std::abs(hn - hg);
            if (!std::isfinite(hn)) throw NumericalError("march: non-finite H; reduce the step dx");
            if (diff <= ctl.tolerance * std::abs(hn) || diff < 1e-300) break;
            if (it >= 2 && diff > 0.9 * prev_diff)
                throw NumericalError("march: H iteration does not contract; reduce the step dx");
            if (it > 200) throw NumericalError("march: H iteration did not converge; reduce the step dx");
            prev_diff = diff;
            hg = hn;
        }
        cur[0] = hn;
        const double ui = au + bu * hn, vi = av + bv * hn;
        U[4 + i] = ui;
        V[4 + i] = vi;
        last = i;

        if (!std::isfinite(ui) || !std::isfinite(vi)) throw NumericalError("march: non-finite U or V");
        if (vi < -ctl.delta || ((hn <= 0.0 || ui <= 0.0) && vi < 0.0)) {
            out.classification = Classification::Overshoot;
            done = true;
            break;
        }
        if (hn <= 0.0 || ui <= 0.0)
            throw IntegrityError("march: H or U became non-positive while V >= 0 at X = " + std::to_string(X));

        // U crossing detection with hysteresis
        if (!side_known) {
            if (ui != 1.0) {
                side_known = true;
                below = ui < 1.0;
                ext = ui;
            }
        } else if (i > 0) {
            const double* uu = &U[4 + i];
            const double* vv = &V[4 + i];
            bool raw_cross = below ? (uu[-1] < 1.0 && ui >= 1.0) : (uu[-1] >= 1.0 && ui < 1.0);
            if (raw_cross) {
                double lo = 0.0, hi = 1.0;  // theta = 0 at node i
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    bool side_mid = cubic_at(uu, mid) < 1.0;
                    if (side_mid == (ui < 1.0)) lo = mid;
                    else hi = mid;
                }
                double th = 0.5 * (lo + hi);
                cand_x = X - th * h;
                cand_v = cubic_at(vv, th);
            }
            if (below) {
                ext = std::min(ext, ui);
                if (ui > 1.0 + std::max(floor_gap, ctl.hysteresis * (1.0 - ext))) {
                    below = false;
                    ext = ui;
                    ++out.upward_crossings;
                    cycle_open = true;
                    rec = CycleRecord{};
                    rec.n = out.upward_crossings;
                    rec.x_plus = cand_x;
                    rec.a = cand_v - 1.0;
                    peak_h = -1.0;
                }
            } else {
                ext = std::max(ext, ui);
                if (ui < 1.0 - std::max(floor_gap, ctl.hysteresis * std::min(ext - 1.0, 1.0))) {
                    below = true;
                    ext = ui;
                    if (cycle_open && peak_h > 0.0) {
                        rec.x_minus = cand_x;
                        double x0 = grid.node(peak_i);
                        const double* hp = &H[nc + peak_i];
                        double den = hp[-1] - 2.0 * hp[0] + hp[1];
                        if (den < 0.0) x0 += 0.5 * h * (hp[-1] - hp[1]) / den;
                        rec.x_zero = x0;
                        out.cycles.push_back(rec);
                        awaiting_return = true;
                    }
                    cycle_open = false;
                }
            }
        }
        if (awaiting_return && vi > 1.0) {
            awaiting_return = false;
            ++out.cycle_returns;
            if (ctl.target_cycles >= 0 && out.cycle_returns > ctl.target_cycles) {
                out.classification = Classification::Undershoot;
                done = true;
                break;
            }
        }
        if (cycle_open && hn > peak_h) {
            peak_h = hn;
            peak_i = i;
        }

        if (vi >= 0.0 && vi <= ctl.delta && hn < ctl.delta && ui < ctl.delta) {
            if (std::isnan(conv_start)) conv_start = X;
            if (ctl.stop_on_converged && X - conv_start >= window) {
                out.classification = Classification::Converged;
                done = true;
                break;
            }
        } else {
            conv_start = std::numeric_limits<double>::quiet_NaN();
        }
    }
    if (!done) out.classification = Classification::Budget;

    std::size_t count = std::max<std::size_t>(last + 1, 2);
    if (count > n) count = n;
    std::vector<double> th(H.begin() + nc, H.begin() + nc + count);
    std::vector<double> tu(U.begin() + 4, U.begin() + 4 + count);
    std::vector<double> tv(V.begin() + 4, V.begin() + 4 + count);
    out.terminal_x = grid.node(last);
    out.trajectory = Trajectory(params, LogGrid{grid.x_start, h, count}, std::move(th), std::move(tu), std::move(tv), K);
    return out;
}

unsigned thread_budget(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("COAGSCALE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

namespace {

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// +1 when the run ended on the overshoot side, -1 otherwise
int side_of(const ShotOutcome& o) {
    switch (o.classification) {
        case Classification::Overshoot: return 1;
        case Classification::Undershoot: return -1;
        default: {
            const auto& v = o.trajectory.v_values();
            return v.back() < 0.0 ? 1 : -1;
        }
    }
}

}  // namespace

ShotResult shoot(const ModelParams& params, const LogGrid& grid, const ShootControls& controls) {
    if (controls.scan_points < 2 || controls.scan_points > 64)
        throw DomainError("shoot: scan_points must lie in [2, 64]");
    if (!(controls.relative_width > 0.0)) throw DomainError("shoot: relative_width must be positive");
    const HistoryWeights weights(params.lambda, grid.step);
    const double k_hi = params.k_interval_upper;
    const int np = controls.scan_points;

    ShotResult res;
    std::vector<ShotOutcome> runs(np);
    res.scan.resize(np);
    MarchControls free_run = controls.march;
    free_run.target_cycles = -1;
    free_run.stop_on_converged = false;
    parallel_for(np, thread_budget(controls.threads), [&](std::size_t i) {
        double K = 1.0 + (k_hi - 1.0) * static_cast<double>(i) / np;
        runs[i] = march(weights, params, K, grid, free_run);
        runs[i].trajectory = Trajectory();
        res.scan[i].K = K;
        res.scan[i].returns = runs[i].cycle_returns;
    });

    int m = std::numeric_limits<int>::max();
    for (int i = 0; i < np; ++i)
        if (runs[i].classification == Classification::Overshoot) m = std::min(m, runs[i].cycle_returns);
    if (m == std::numeric_limits<int>::max()) {
        std::string msg = "shoot: no scan point overshoots;";
        for (auto& s : res.scan) msg += " K=" + std::to_string(s.K) + ":" + to_string(runs[&s - &res.scan[0]].classification);
        throw SearchError(msg);
    }
    res.target_cycles = m;

    std::vector<int> sides(np);
    for (int i = 0; i < np; ++i) {
        auto& s = res.scan[i];
        if (s.returns > m) s.classification = Classification::Undershoot;
        else if (runs[i].classification == Classification::Overshoot) s.classification = Classification::Overshoot;
        else s.classification = Classification::Budget;
        sides[i] = s.classification == Classification::Overshoot ? 1 : (s.classification == Classification::Undershoot ? -1 : 0);
    }
    for (int i = 0; i + 1 < np; ++i)
        if (sides[i] != 0 && sides[i + 1] != 0 && sides[i] != sides[i + 1])
            res.brackets.push_back({res.scan[i].K, res.scan[i + 1].K});
    if (res.brackets.empty()) {
        std::string msg = "shoot: no sign change in the fundamental interval;";
        for (auto& s : res.scan) msg += " K=" + std::to_string(s.K) + ":" + to_string(s.classification);
        throw SearchError(msg);
    }

    MarchControls bis = controls.march;
    bis.target_cycles = m;
    bis.stop_on_converged = false;
    double lo = res.brackets.front().lo, hi = res.brackets.front().hi;
    int s_lo = sides[std::find_if(res.scan.begin(), res.scan.end(), [&](auto& s) { return s.K == lo; }) - res.scan.begin()];
    while (hi - lo >= controls.relative_width * 0.5 * (lo + hi) && res.bisection_steps < 200) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        auto o = march(weights, params, mid, grid, bis);
        ++res.bisection_steps;
        if (side_of(o) == s_lo) lo = mid;
        else hi = mid;
    }
    res.bracket = {lo, hi};
    // the undershoot end keeps V positive while the tail decays, so it is tried first
    MarchControls fin = controls.march;
    fin.target_cycles = m;
    double first = s_lo < 0 ? lo : hi, second = s_lo < 0 ? hi : lo;
    res.k_star = first;
    res.outcome = march(weights, params, first, grid, fin);
    if (res.outcome.classification != Classification::Converged) {
        auto alt = march(weights, params, second, grid, fin);
        if (alt.classification == Classification::Converged) {
            res.k_star = second;
            res.outcome = std::move(alt);
        }
    }
    return res;
}

}  // namespace coagscale::shooting
