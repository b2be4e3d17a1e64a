#pragma once

#include <complex>
#include <string>
#include <vector>

#include "profile.hpp"

namespace coagscale::shooting {

using cplx = std::complex<double>;
using profile::LogGrid;
using profile::Trajectory;
using special::ModelParams;

enum class Classification { Overshoot, Undershoot, Converged, Budget };
const char* to_string(Classification c);

struct CycleRecord {
    int n = 0;
    double a = 0.0;
    double x_plus = 0.0;
    double x_zero = 0.0;
    double x_minus = 0.0;
};

struct MarchControls {
    double delta = 1e-3;
    double tolerance = 1e-10;     // relative change accepted by the H iteration
    int target_cycles = -1;       // completed cycles allowed before Undershoot; negative disables
    bool stop_on_converged = true;
    double converged_window = 0.0;  // 0 selects 2/lambda
    double hysteresis = 0.1;
};

struct ShotOutcome {
    Classification classification = Classification::Budget;
    double terminal_x = 0.0;
    Trajectory trajectory;
    std::vector<CycleRecord> cycles;
    int upward_crossings = 0;
    int cycle_returns = 0;  // completed cycles after which V came back above 1
};

// Quadrature weights W_jk with I_i = H_lambda * sum_jk W_jk H_{i-j} H_{i-k}
// for the causal cubic interpolant on a uniform grid.
class HistoryWeights {
public:
    HistoryWeights(double lambda, double step);

    double lambda() const { return lambda_; }
    double step() const { return step_; }
    std::size_t columns() const { return ncol_; }
    double weight(std::size_t j, std::size_t k) const;
    double total() const;

    // P, Q, R of I = H_lambda (P + Q H_0 + R H_0^2) given past values hist[k] = H_{i-k}, k >= 1.
    void split(const double* hist, double& p, double& q, double& r) const;

private:
    double lambda_, step_;
    std::size_t ncol_ = 0, near_ = 0;
    std::vector<double> dense_;   // rows j < near_, all columns
    std::vector<double> cross_;   // rows j >= near_, columns k < near_
    std::vector<std::size_t> dense_end_, cross_end_;
    std::vector<double> col0_;    // W_k0 + W_0k for k >= 1
};

double default_x_start(const ModelParams& params, double level = 1e-4);
LogGrid default_grid(const ModelParams& params, double step = 0.02, double x_max = 0.0);

ShotOutcome march(const ModelParams& params, cplx K, const LogGrid& grid, const MarchControls& controls = {});
ShotOutcome march(const HistoryWeights& weights, const ModelParams& params, cplx K, const LogGrid& grid,
                  const MarchControls& controls = {});

struct ScanPoint {
    double K = 0.0;
    Classification classification = Classification::Budget;
    int returns = 0;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

struct ShootControls {
    MarchControls march;
    int scan_points = 16;
    double relative_width = 1e-12;
    unsigned threads = 0;  // 0 reads COAGSCALE_THREADS, else hardware concurrency
};

struct ShotResult {
    double k_star = 0.0;
    Bracket bracket;
    int target_cycles = 0;
    int bisection_steps = 0;
    std::vector<ScanPoint> scan;
    std::vector<Bracket> brackets;
    ShotOutcome outcome;
};

ShotResult shoot(const ModelParams& params, const LogGrid& grid, const ShootControls& controls = {});

unsigned thread_budget(unsigned requested = 0);

}  // namespace coagscale::shooting
