#pragma once

#include <string>
#include <vector>

namespace coagscale::regime {

double energy(double u, double omega);

struct TurningPoints {
    double u_minus = 1.0;
    double u_plus = 1.0;
    double log_u_minus = 0.0;
    double log_u_plus = 0.0;
};

// Roots of log U - (U - 1) = omega^2/2 - E on either side of U = 1.
TurningPoints turning_points(double E, double omega);
// Same roots addressed by the gap E - omega^2/2 directly.
TurningPoints turning_points_at_gap(double gap);

double period(double E);
double phi(double E);

// Time-domain measurements over one closed orbit starting at (U+, 0).
struct OrbitMeasure {
    double period = 0.0;
    double phi = 0.0;
    double max_energy_drift = 0.0;
};
OrbitMeasure measure_orbit(double E);

double energy_rate(double lambda, double u, double omega);

struct PerturbedSample {
    double xi;
    double u;
    double omega;
    double energy;
};

struct PerturbedPath {
    std::vector<PerturbedSample> samples;
    bool regime_exit = false;
    std::string exit_reason;
};

PerturbedPath integrate_perturbed(double lambda, double u0, double omega0, double xi_span,
                                  double sample_spacing = 0.05, double exit_threshold = 0.5);

// Energy gained over one turn of the perturbed system started at (U+(E0,0), 0).
struct CycleGain {
    double e_start = 0.0;
    double e_end = 0.0;
    double duration = 0.0;
};
CycleGain perturbed_cycle_gain(double lambda, double E0);

double intermediate_invariant(double lambda, double u, double v);

struct IntermediateSample {
    double x;
    double u;
    double v;
    double invariant;
};

struct IntermediatePath {
    std::vector<IntermediateSample> samples;
    bool returned = false;
    double return_x = 0.0;
    double return_v = 0.0;
};

IntermediatePath integrate_intermediate(double lambda, double u0, double v0, double x_span,
                                        double sample_spacing = 0.1, bool stop_on_return = false);

double amplitude_map_residual(double a_minus, double a_plus);
double a_plus_from_a_minus(double a_minus);
double transition_length(double lambda, double a_minus, double a_plus);

}  // namespace coagscale::regime
