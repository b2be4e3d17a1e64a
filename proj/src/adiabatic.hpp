#pragma once

#include <array>
#include <vector>

namespace coagscale::adiabatic {

struct CycleProfile {
    double omega0 = 0.0;
    double energy = 0.0;
    std::array<double, 4> xi{};     // stations xi_1..xi_4
    std::array<double, 4> sigma{};  // sigma at the stations, time route
    std::array<double, 3> omega{};  // omega at xi_1..xi_3
    std::array<double, 3> sigma_by_omega{};
    double phi = 0.0;
};

CycleProfile sigma_profile(double omega0);

struct SigmaSample {
    double xi;
    double sigma;
};

std::vector<SigmaSample> sigma_path(double omega0, std::size_t n_samples);

struct SandwichResult {
    bool ok = false;
    double margin = 0.0;  // worst distance inside the tolerated envelope
    double lower = 0.0;
    double upper = 0.0;
    double tolerance = 0.0;
};

SandwichResult sandwich_check(double omega0, std::size_t n_samples = 2000);

}  // namespace coagscale::adiabatic
