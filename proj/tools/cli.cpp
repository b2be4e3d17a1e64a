#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coagscale.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure {
    int code;
    std::string message;
};

int exit_code_for(cs_status s) {
    switch (s) {
        case CS_OK: return 0;
        case CS_ERR_DOMAIN:
        case CS_ERR_RANGE:
        case CS_ERR_IO:
            return 2;
        default:
            return 3;
    }
}

void check(cs_status s) {
    if (s != CS_OK) throw Failure{exit_code_for(s), std::string(cs_status_name(s)) + ": " + cs_last_error_message()};
}

template <class T, void (*D)(T*)>
struct Deleter {
    void operator()(T* p) const { D(p); }
};
using PeakPtr = std::unique_ptr<cs_peak, Deleter<cs_peak, cs_peak_destroy>>;
using ShotPtr = std::unique_ptr<cs_shot, Deleter<cs_shot, cs_shot_destroy>>;
using TrajPtr = std::unique_ptr<cs_trajectory, Deleter<cs_trajectory, cs_trajectory_destroy>>;
using MatchPtr = std::unique_ptr<cs_matching, Deleter<cs_matching, cs_match_destroy>>;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) { row(header); }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    void values(const std::vector<double>& cells) {
        std::vector<std::string> s;
        for (double v : cells) s.push_back(num(v));
        row(s);
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

struct Output {
    std::string dir;

    bool enabled() const { return !dir.empty(); }

    void prepare() const {
        if (!enabled()) return;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) throw Failure{2, "cannot create output directory " + dir};
    }

    std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }

    void write(const std::string& name, const std::string& text) const {
        if (!enabled()) return;
        std::ofstream f(path(name), std::ios::binary);
        f << text;
        if (!f) throw Failure{2, "cannot write " + path(name)};
    }
};

void emit(const Output& out, const std::string& name, const std::string& text) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    out.write(name, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw Failure{1, "malformed number in list: " + tok};
        values.push_back(v);
    }
    if (values.empty()) throw Failure{1, "empty list"};
    return values;
}

// Geometric spacing when the range is positive, linear otherwise.
std::vector<double> sample_range(double lo, double hi, int n, bool geometric) {
    if (n < 1) throw Failure{2, "sample count must be positive"};
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        v.push_back(geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return v;
}

int cmd_dispersion(double lambda, const Output& out) {
    cs_dispersion_info d{};
    check(cs_dispersion(lambda, &d));
    json j;
    j["lambda"] = d.lambda;
    j["h_lambda"] = d.h_lambda;
    j["mu_plus"] = {{"re", d.mu_re}, {"im", d.mu_im}};
    j["alpha"] = d.alpha;
    j["beta"] = d.beta;
    j["k_interval_upper"] = d.k_interval_upper;
    j["psi_residual"] = d.residual;
    emit(out, "dispersion.json", dump(j));
    return 0;
}

struct ShootArgs {
    double lambda = 0.1;
    double x_start = NAN, dx = 0.02, x_max = NAN, delta = 1e-3, tolerance = 1e-10;
    int scan_points = 16;
    unsigned threads = 0;
};

int cmd_shoot(const ShootArgs& a, const Output& out) {
    cs_shoot_options opt{};
    check(cs_shoot_options_default(a.lambda, &opt));
    if (!(a.dx > 0.0)) throw Failure{2, "dx must be positive"};
    double default_max = opt.x_max;
    opt.step = a.dx;
    if (!std::isnan(a.x_start)) opt.x_start = a.x_start;
    opt.x_max = std::isnan(a.x_max) ? default_max : a.x_max;
    opt.delta = a.delta;
    opt.tolerance = a.tolerance;
    opt.scan_points = a.scan_points;
    opt.threads = a.threads;

    cs_shot* raw = nullptr;
    check(cs_shoot(a.lambda, &opt, &raw));
    ShotPtr shot(raw);
    cs_shot_summary s{};
    check(cs_shot_summary_get(shot.get(), &s));

    json j;
    j["lambda"] = s.lambda;
    j["K_star"] = s.k_star;
    j["bracket"] = {s.bracket_lo, s.bracket_hi};
    j["target_cycles"] = s.target_cycles;
    j["classification"] = cs_classification_name(s.classification);
    auto& cycles = j["cycles"] = json::array();
    for (std::size_t i = 0; i < s.cycle_count; ++i) {
        cs_cycle c{};
        check(cs_shot_cycle(shot.get(), i, &c));
        cycles.push_back({{"n", c.n}, {"a_n", c.a}, {"X_n_plus", c.x_plus}, {"X_n_0", c.x_zero}, {"X_n_minus", c.x_minus}});
    }
    j["terminal_X"] = s.terminal_x;
    if (out.enabled()) {
        cs_trajectory* t = nullptr;
        check(cs_shot_trajectory(shot.get(), &t));
        TrajPtr traj(t);
        check(cs_trajectory_write_csv(traj.get(), out.path("shoot_trajectory.csv").c_str()));
        check(cs_trajectory_write_sidecar(traj.get(), out.path("shoot_trajectory.json").c_str()));
    }
    emit(out, "shoot.json", dump(j));
    return 0;
}

struct RegimeArgs {
    double lambda = 1e-3;
    double e_min = 1e-3, e_max = 1e3;
    int n_energy = 25;
    double a_min = 0.02, a_max = 0.9;
    int n_amplitude = 25;
};

int cmd_regimes(const RegimeArgs& a, const Output& out) {
    if (!(a.e_min > 0.0 && a.e_max >= a.e_min)) throw Failure{2, "energy range must be positive and ordered"};
    if (!(a.a_min > 0.0 && a.a_max >= a.a_min && a.a_max < 1.0)) throw Failure{2, "amplitude range must lie in (0, 1)"};
    Csv energy({"E", "T", "Phi"});
    for (double e : sample_range(a.e_min, a.e_max, a.n_energy, true)) {
        double t = 0.0, p = 0.0;
        check(cs_regime_period(e, &t));
        check(cs_regime_phi(e, &p));
        energy.values({e, t, p});
    }
    Csv amp({"a_minus", "a_plus", "length"});
    for (double am : sample_range(a.a_min, a.a_max, a.n_amplitude, false)) {
        double ap = 0.0, len = 0.0;
        check(cs_amplitude_map(am, &ap));
        check(cs_transition_length(a.lambda, am, ap, &len));
        amp.values({am, ap, len});
    }
    emit(out, "regimes_energy.csv", energy.str());
    std::fputs("\n", stdout);
    emit(out, "regimes_amplitude.csv", amp.str());
    return 0;
}

struct PeakArgs {
    double a = 1.0, kappa = 1.0;
    double x_min = -5.0, x_max = 3.0;
    int n = 161;
};

int cmd_peaks(const PeakArgs& a, const Output& out) {
    cs_peak* raw = nullptr;
    check(cs_peak_create(a.a, a.kappa, &raw));
    PeakPtr peak(raw);
    if (!(a.x_max >= a.x_min)) throw Failure{2, "x-max must not be below x-min"};
    Csv csv({"X", "V", "H", "U", "residual"});
    for (double X : sample_range(a.x_min, a.x_max, a.n, false)) {
        double v = 0, h = 0, u = 0, r = 0;
        check(cs_peak_eval(peak.get(), X, &v, &h, &u));
        check(cs_peak_convolution_residual(peak.get(), std::exp(X), &r));
        csv.values({X, v, h, u, r});
    }
    emit(out, "peaks.csv", csv.str());
    return 0;
}

struct MatchArgs {
    double lambda = 1e-3, a1 = 0.05, x1 = 0.0;
    int max_cycles = 10;
    int samples = 400;
};

int cmd_match(const MatchArgs& a, const Output& out) {
    cs_matching* raw = nullptr;
    check(cs_match_run(a.lambda, a.a1, a.x1, a.max_cycles, &raw));
    MatchPtr m(raw);
    std::size_t count = 0;
    check(cs_match_count(m.get(), &count));
    json records = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        cs_match_record r{};
        check(cs_match_record_get(m.get(), i, &r));
        records.push_back({{"n", r.n}, {"a_n", r.a}, {"X_n_plus", r.x_plus}, {"X_n_0", r.x_zero}, {"X_n_minus", r.x_minus},
                           {"energy", r.energy}});
    }
    if (out.enabled() && count > 0) {
        double lo = 0, hi = 0;
        check(cs_match_range(m.get(), &lo, &hi));
        Csv csv({"X", "H", "regime", "cycle"});
        for (double X : sample_range(lo, hi, a.samples, false)) {
            double h = 0;
            cs_regime reg{};
            int cyc = 0;
            check(cs_match_composite(m.get(), X, &h, &reg, &cyc));
            csv.row({num(X), num(h), cs_regime_name(reg), std::to_string(cyc)});
        }
        out.write("match_profile.csv", csv.str());
    }
    emit(out, "match.json", dump(records));
    return 0;
}

int cmd_adiabatic(const std::string& list, const Output& out) {
    Csv csv({"omega0", "xi1", "xi2", "xi3", "xi4", "sigma1", "sigma2", "sigma3", "sigma4", "phi", "margin"});
    for (double w : parse_list(list)) {
        cs_cycle_profile p{};
        check(cs_adiabatic_profile(w, &p));
        csv.values({p.omega0, p.xi[0], p.xi[1], p.xi[2], p.xi[3], p.sigma[0], p.sigma[1], p.sigma[2], p.sigma[3], p.phi,
                    p.margin});
    }
    emit(out, "adiabatic.csv", csv.str());
    return 0;
}

int cmd_report(double lambda, const std::string& criteria, const Output& out) {
    std::vector<int> ids;
    if (!criteria.empty())
        for (double v : parse_list(criteria)) ids.push_back(static_cast<int>(v));
    char* text = nullptr;
    int all = 0;
    check(cs_report_json(lambda, ids.empty() ? nullptr : ids.data(), ids.size(), &text, &all));
    std::string s = std::string(text) + "\n";
    cs_string_free(text);
    emit(out, "report.json", s);
    return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-similar coagulation profiles: dispersion, shooting, regimes, peaks, matching, adiabatic, report"};
    app.set_config("--config", "", "INI file with key = value settings; flags override it");
    app.require_subcommand(1);
    Output out;
    app.add_option("--out-dir", out.dir, "directory for output artifacts");

    double disp_lambda = 0.1;
    auto* disp = app.add_subcommand("dispersion", "growth rate of the linearised problem");
    disp->add_option("--lambda", disp_lambda)->required();

    ShootArgs sa;
    auto* shoot = app.add_subcommand("shoot", "shoot for the tail amplitude K*");
    shoot->add_option("--lambda", sa.lambda);
    shoot->add_option("--x-start", sa.x_start);
    shoot->add_option("--dx", sa.dx);
    shoot->add_option("--x-max", sa.x_max);
    shoot->add_option("--delta", sa.delta);
    shoot->add_option("--tolerance", sa.tolerance);
    shoot->add_option("--scan-points", sa.scan_points);
    shoot->add_option("--threads", sa.threads);

    RegimeArgs ra;
    auto* regimes = app.add_subcommand("regimes", "period, energy gain and amplitude-map tables");
    regimes->add_option("--lambda", ra.lambda);
    regimes->add_option("--e-min", ra.e_min);
    regimes->add_option("--e-max", ra.e_max);
    regimes->add_option("--n-energy", ra.n_energy);
    regimes->add_option("--a-min", ra.a_min);
    regimes->add_option("--a-max", ra.a_max);
    regimes->add_option("--n-amplitude", ra.n_amplitude);

    PeakArgs pa;
    auto* peaks = app.add_subcommand("peaks", "peak profile samples");
    peaks->add_option("--a", pa.a);
    peaks->add_option("--kappa", pa.kappa);
    peaks->add_option("--x-min", pa.x_min);
    peaks->add_option("--x-max", pa.x_max);
    peaks->add_option("--n", pa.n);

    MatchArgs ma;
    auto* match = app.add_subcommand("match", "matched asymptotic cycle recursion");
    match->add_option("--lambda", ma.lambda);
    match->add_option("--a1", ma.a1);
    match->add_option("--x1", ma.x1);
    match->add_option("--max-cycles", ma.max_cycles);
    match->add_option("--samples", ma.samples);

    std::string omega_list = "0.01,0.1,1,10,30";
    auto* adiabatic = app.add_subcommand("adiabatic", "adiabatic cycle stations and sigma values");
    adiabatic->add_option("--omega0-list", omega_list);

    double report_lambda = 0.1;
    std::string report_criteria;
    auto* report = app.add_subcommand("report", "run the validation suite and emit a JSON report");
    report->add_option("--lambda", report_lambda);
    report->add_option("--criteria", report_criteria, "comma separated criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        out.prepare();
        if (*disp) return cmd_dispersion(disp_lambda, out);
        if (*shoot) return cmd_shoot(sa, out);
        if (*regimes) return cmd_regimes(ra, out);
        if (*peaks) return cmd_peaks(pa, out);
        if (*match) return cmd_match(ma, out);
        if (*adiabatic) return cmd_adiabatic(omega_list, out);
        if (*report) return cmd_report(report_lambda, report_criteria, out);
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        return f.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
