#include "profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include <nlohmann/json.hpp>

namespace coagscale::profile {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Weight {
    double rate;
    int power;
    double operator()(double r) const {
        double w = std::exp(rate * r);
        return power == 0 ? w : std::pow(r, power) * w;
    }
};

double involution(double r) { return -std::log(-std::expm1(-r)); }

double piece(const std::function<double(double)>& f, double a, double b, unsigned depth = 0) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    return GK::integrate(f, a, b, depth, 1e-13, &err);
}

// Integral of ws(s) wt(t) H(X-s) H(X-t) over {s, t >= 0 : e^{-s} + e^{-t} >= 1},
// split at s = ln 2 or t = ln 2 so that neither inner integral is singular.
double region_integral(const Trajectory& traj, double X, Weight ws, Weight wt) {
    const double h = traj.grid().step;
    const double x0 = traj.grid().x_start;
    const double ln2 = std::log(2.0);
    const double r_max = history_depth(traj.params().lambda, traj.max_h());
    auto hist = [&](double r) { return traj.h_at(X - r); };

    // kinks of the interpolant sit at r0 + q h
    double jf = std::floor((X - x0) / h + 1e-9);
    double r0 = std::max(0.0, X - (x0 + jf * h));
    if (r0 > h * (1 - 1e-9)) r0 = 0.0;

    std::vector<double> pts = {0.0};
    for (long q = 0;; ++q) {
        double r = r0 + q * h;
        if (r >= ln2) break;
        if (r > 0.0) pts.push_back(r);
    }
    pts.push_back(ln2);

    auto prefix_of = [&](const Weight& w) {
        std::vector<double> pre(pts.size(), 0.0);
        auto f = [&](double r) { return w(r) * hist(r); };
        for (std::size_t k = 1; k < pts.size(); ++k) pre[k] = pre[k - 1] + piece(f, pts[k - 1], pts[k]);
        return pre;
    };
    const std::vector<double> pre_s = prefix_of(ws);
    const std::vector<double> pre_t = prefix_of(wt);

    auto small_integral = [&](const Weight& w, const std::vector<double>& pre, double ell) {
        if (ell <= 0.0) return 0.0;
        auto it = std::upper_bound(pts.begin(), pts.end(), ell);
        std::size_t k = static_cast<std::size_t>(it - pts.begin()) - 1;
        if (k >= pts.size() - 1) return pre.back();
        auto f = [&](double r) { return w(r) * hist(r); };
        return pre[k] + piece(f, pts[k], ell);
    };

    double total = pre_s.back() * pre_t.back();

    std::vector<double> outer = {ln2, r_max};
    for (long q = 0;; ++q) {
        double r = r0 + q * h;
        if (r >= r_max) break;
        if (r > ln2) outer.push_back(r);
    }
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) outer.push_back(involution(pts[k]));
    std::sort(outer.begin(), outer.end());

    auto fb = [&](double t) { return wt(t) * hist(t) * small_integral(ws, pre_s, involution(t)); };
    auto fc = [&](double s) { return ws(s) * hist(s) * small_integral(wt, pre_t, involution(s)); };
    for (std::size_t k = 1; k < outer.size(); ++k) {
        if (outer[k] - outer[k - 1] < 1e-14) continue;
        total += piece(fb, outer[k - 1], outer[k]);
        total += piece(fc, outer[k - 1], outer[k]);
    }
    return total;
}

}  // namespace

void LogGrid::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("LogGrid: step must be positive");
    if (count < 2) throw DomainError("LogGrid: need at least two nodes");
    if (!std::isfinite(x_start)) throw DomainError("LogGrid: x_start must be finite");
}

State prehistory(const ModelParams& p, cplx K, double X) {
    const double lam = p.lambda;
    const cplx mu = p.mu_plus;
    cplx e = K * std::exp(mu * X);
    State s;
    s.h = 1.0 + e.real();
    s.u = 1.0 + (e * ((1.0 - lam) / ((1.0 - lam) + mu))).real();
    s.v = 1.0 + (e * (-lam / (mu - lam))).real();
    return s;
}

void cubic_weights(double th, double w[4]) {
    w[0] = -(th - 1.0) * (th - 2.0) * (th - 3.0) / 6.0;
    w[1] = th * (th - 2.0) * (th - 3.0) / 2.0;
    w[2] = -th * (th - 1.0) * (th - 3.0) / 2.0;
    w[3] = th * (th - 1.0) * (th - 2.0) / 6.0;
}

double history_depth(double lambda, double h_scale) {
    return (std::log(1e14) + 2.0 * std::log(std::max(1.0, h_scale))) / (1.0 - lambda) + 4.0;
}

Trajectory::Trajectory(ModelParams params, LogGrid grid, std::vector<double> h, std::vector<double> u,
                       std::vector<double> v, cplx tail_amplitude)
    : params_(params), grid_(grid), h_(std::move(h)), u_(std::move(u)), v_(std::move(v)), k_(tail_amplitude) {
    grid_.validate();
    if (h_.size() != grid_.count || u_.size() != grid_.count || v_.size() != grid_.count)
        throw DomainError("Trajectory: value sequences must match the grid size");
    for (int m = 0; m < 4; ++m) virt_[m] = prehistory(params_, k_, grid_.node(0) - (m + 1) * grid_.step);
    max_h_ = 1.0;
    for (int m = 0; m < 4; ++m) max_h_ = std::max(max_h_, std::abs(virt_[m].h));
    for (double x : h_) max_h_ = std::max(max_h_, std::abs(x));
}

double Trajectory::node_h(long j) const { return j >= 0 ? h_[j] : virt_[-j - 1].h; }
double Trajectory::node_u(long j) const { return j >= 0 ? u_[j] : virt_[-j - 1].u; }
double Trajectory::node_v(long j) const { return j >= 0 ? v_[j] : virt_[-j - 1].v; }

State Trajectory::eval_history(double X) const {
    if (X < grid_.x_start) return prehistory(params_, k_, X);
    double f = (X - grid_.x_start) / grid_.step;
    double last = static_cast<double>(grid_.count - 1);
    if (f > last + 1e-9) throw RangeError("eval_history: X beyond the last stored node");
    double rf = std::round(f);
    if (std::abs(f - rf) < 1e-9) {
        std::size_t j = static_cast<std::size_t>(rf);
        return {h_[j], u_[j], v_[j]};
    }
    long j = static_cast<long>(std::ceil(f));
    double w[4];
    cubic_weights(j - f, w);
    State s{0.0, 0.0, 0.0};
    for (int m = 0; m < 4; ++m) {
        s.h += w[m] * node_h(j - m);
        s.u += w[m] * node_u(j - m);
        s.v += w[m] * node_v(j - m);
    }
    return s;
}

double Trajectory::h_at(double X) const {
    if (X < grid_.x_start) return prehistory(params_, k_, X).h;
    double f = (X - grid_.x_start) / grid_.step;
    double last = static_cast<double>(grid_.count - 1);
    if (f > last + 1e-9) throw RangeError("eval_history: X beyond the last stored node");
    double rf = std::round(f);
    if (std::abs(f - rf) < 1e-9) return h_[static_cast<std::size_t>(rf)];
    long j = static_cast<long>(std::ceil(f));
    double w[4];
    cubic_weights(j - f, w);
    return w[0] * node_h(j) + w[1] * node_h(j - 1) + w[2] * node_h(j - 2) + w[3] * node_h(j - 3);
}

Trajectory constant_trajectory(const ModelParams& params, const LogGrid& grid, double value) {
    grid.validate();
    std::vector<double> v(grid.count, value);
    return Trajectory(params, grid, v, v, v, 0.0);
}

double eval_I(const Trajectory& traj, double X) {
    const double lam = traj.params().lambda;
    return traj.params().h_lambda * region_integral(traj, X, {-(1.0 - lam), 0}, {lam, 0});
}

std::vector<double> fixed_point_residual(const Trajectory& traj, std::size_t stride) {
    if (stride == 0) throw DomainError("fixed_point_residual: stride must be positive");
    const auto& p = traj.params();
    const double c = p.h_lambda / (p.lambda * (1.0 - p.lambda));
    std::vector<double> out;
    for (std::size_t i = 0; i < traj.size(); i += stride) {
        double X = traj.grid().node(i);
        out.push_back(traj.h_values()[i] - c * traj.u_values()[i] * traj.v_values()[i] - eval_I(traj, X));
    }
    return out;
}

Consistency consistency_residuals(const Trajectory& traj, double X) {
    const double l2 = traj.params().lambda * traj.params().lambda;
    Consistency c;
    c.r1 = l2 * region_integral(traj, X, {-1.0, 1}, {0.0, 0});
    c.r2 = l2 * region_integral(traj, X, {-1.0, 0}, {0.0, 1});
    return c;
}

double approx_I(const Trajectory& traj, double X) {
    return traj.params().lambda * region_integral(traj, X, {-1.0, 0}, {0.0, 0});
}

void write_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "X,H,U,V\n");
    for (std::size_t i = 0; i < traj.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", traj.grid().node(i), traj.h_values()[i], traj.u_values()[i],
                     traj.v_values()[i]);
    if (std::fclose(f) != 0) throw IoError("failed writing " + path);
}

void write_sidecar(const Trajectory& traj, const std::string& path) {
    nlohmann::ordered_json j;
    j["lambda"] = traj.params().lambda;
    j["K"] = {{"re", traj.tail_amplitude().real()}, {"im", traj.tail_amplitude().imag()}};
    j["grid"] = {{"x_start", traj.grid().x_start}, {"step", traj.grid().step}, {"count", traj.grid().count}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

Trajectory read_trajectory(const std::string& csv_path, const std::string& sidecar_path) {
    std::ifstream js(sidecar_path);
    if (!js) throw IoError("cannot open " + sidecar_path);
    nlohmann::json j;
    try {
        js >> j;
    } catch (const std::exception& e) {
        throw IoError(std::string("malformed sidecar: ") + e.what());
    }
    double lambda = j.at("lambda").get<double>();
    cplx K(j.at("K").at("re").get<double>(), j.at("K").at("im").get<double>());
    LogGrid g{j.at("grid").at("x_start").get<double>(), j.at("grid").at("step").get<double>(),
              j.at("grid").at("count").get<std::size_t>()};
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path);
    std::string line;
    std::getline(in, line);
    if (line != "X,H,U,V") throw IoError("unexpected CSV header in " + csv_path);
    std::vector<double> h, u, v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double x, a, b, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &a, &b, &c) != 4)
            throw IoError("malformed CSV row in " + csv_path);
        h.push_back(a);
        u.push_back(b);
        v.push_back(c);
    }
    return Trajectory(ModelParams::make(lambda), g, h, u, v, K);
}

}  // namespace coagscale::profile
