#pragma once

#include <optional>
#include <vector>

#include "profile.hpp"

namespace coagscale::matching {

struct MatchRecord {
    int n = 0;
    double a = 0.0;
    double x_plus = 0.0;
    double x_zero = 0.0;
    double x_minus = 0.0;
    double energy = 0.0;  // a^2 / (2 lambda)
};

struct MatchingSequence {
    double lambda = 0.0;
    std::vector<MatchRecord> records;
    bool terminated = false;     // next amplitude reached 1
    double next_a = 0.0;         // amplitude and ramp point following the last record
    double next_x_plus = 0.0;
};

struct CycleStep {
    MatchRecord record;
    double next_a = 0.0;
    double next_x_plus = 0.0;
};

double energy_of(double lambda, double a);

// Empty once a_n >= 1: the cycle cannot complete.
std::optional<CycleStep> advance_cycle(double lambda, double a_n, double x_plus, int n = 1);

MatchingSequence run_recursion(double lambda, double a1, double x1_plus, int max_cycles);

enum class Regime { Ramp, Peak, Decay, Valley };
const char* to_string(Regime r);

struct CompositeValue {
    double h = 0.0;
    Regime regime = Regime::Ramp;
    int cycle = 0;
};

CompositeValue composite_profile(const MatchingSequence& seq, double X);

double ramp_h(double a, double dx_plus);
double peak_h(double lambda, double a, double dx_zero);
double decay_h(double a, double dx_minus);
double valley_h(double lambda, double a_minus, double dx_minus);

double tail_prediction(double lambda, double x_n, double x);

struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// Least squares of log(H lambda / 2) - log(x / x_n) against -x / x_n for x / x_n in [lo, hi].
TailFit tail_fit(const profile::Trajectory& traj, double x_n, double lo = 1.0, double hi = 10.0);

// Three estimates of the ramp-to-ramp spacing and the per-cycle energy change.
double spacing_from_amplitudes(double lambda, double a_n);
double spacing_from_period(double lambda, double energy);
double spacing_linear(double lambda, double a_n);
double energy_increment(double lambda, double a_n);
double energy_increment_predicted(double lambda, double energy);

}  // namespace coagscale::matching
