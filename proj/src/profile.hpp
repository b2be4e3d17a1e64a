#pragma once

#include <complex>
#include <string>
#include <vector>

#include "special.hpp"

namespace coagscale::profile {

using cplx = std::complex<double>;
using special::ModelParams;

struct LogGrid {
    double x_start = 0.0;
    double step = 0.02;
    std::size_t count = 2;

    double node(std::size_t i) const { return x_start + static_cast<double>(i) * step; }
    double x_end() const { return node(count - 1); }
    void validate() const;
};

struct State {
    double h = 1.0;
    double u = 1.0;
    double v = 1.0;
};

// Linearised behaviour as X -> -infinity with amplitude K.
State prehistory(const ModelParams& params, cplx K, double X);

class Trajectory {
public:
    Trajectory() : grid_{0.0, 0.02, 0} {}
    Trajectory(ModelParams params, LogGrid grid, std::vector<double> h, std::vector<double> u,
               std::vector<double> v, cplx tail_amplitude);

    const ModelParams& params() const { return params_; }
    const LogGrid& grid() const { return grid_; }
    cplx tail_amplitude() const { return k_; }
    const std::vector<double>& h_values() const { return h_; }
    const std::vector<double>& u_values() const { return u_; }
    const std::vector<double>& v_values() const { return v_; }
    std::size_t size() const { return grid_.count; }

    State eval_history(double X) const;
    double h_at(double X) const;
    double max_h() const { return max_h_; }

private:
    double node_h(long j) const;
    double node_u(long j) const;
    double node_v(long j) const;

    ModelParams params_;
    LogGrid grid_;
    std::vector<double> h_, u_, v_;
    cplx k_;
    State virt_[4];  // prehistory at nodes -1..-4
    double max_h_ = 0.0;
};

Trajectory constant_trajectory(const ModelParams& params, const LogGrid& grid, double value);

// Lagrange weights of the causal cubic stencil, theta in [0, 1] measured
// back from the right end of a cell.
void cubic_weights(double theta, double w[4]);

// History depth beyond which the nonlocal integrands fall below 1e-14.
double history_depth(double lambda, double h_scale);

double eval_I(const Trajectory& traj, double X);
std::vector<double> fixed_point_residual(const Trajectory& traj, std::size_t stride = 1);

struct Consistency {
    double r1 = 0.0;
    double r2 = 0.0;
};
Consistency consistency_residuals(const Trajectory& traj, double X);

// Simplified kernel with weights e^{-s} and 1, scaled by lambda.
double approx_I(const Trajectory& traj, double X);

void write_csv(const Trajectory& traj, const std::string& path);
void write_sidecar(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace coagscale::profile
