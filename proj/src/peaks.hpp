#pragma once

#include <complex>

namespace coagscale::peaks {

using cplx = std::complex<double>;

struct PeakSolution {
    double a = 0.5;
    double kappa = 1.0;
    double theta0 = 0.0;          // asymptotic half-angle of the contour
    double contour_radius = 1.0;  // hyperbola scale
    int quadrature_nodes = 1 << 14;
};

// theta0 <= 0 selects the middle of the admissible wedge.
PeakSolution make_peak(double a, double kappa = 1.0, double theta0 = 0.0);

cplx laplace_symbol(double a, double kappa, cplx zeta);

struct PeakValue {
    double v = 0.0;
    double h = 0.0;
    double u = 0.0;
    double imag_residue = 0.0;
    int nodes = 0;
};

PeakValue eval(const PeakSolution& sol, double X);
PeakValue eval_contour(const PeakSolution& sol, double X);
PeakValue eval_closed_form(double kappa, double X);

double eval_V(const PeakSolution& sol, double X);
double eval_H(const PeakSolution& sol, double X);
double eval_U(const PeakSolution& sol, double X);

double convolution_residual(const PeakSolution& sol, double x);

struct DecayCoefficients {
    double c_minus = 0.0;
    double c_plus = 0.0;
};

double growth_coefficient(double a);
DecayCoefficients decay_coefficients(double a);

}  // namespace coagscale::peaks
