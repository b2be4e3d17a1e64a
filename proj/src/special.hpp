#pragma once

#include <complex>

namespace coagscale::special {

using cplx = std::complex<double>;

double log_gamma(double x);
cplx log_gamma(cplx z);
double gamma(double x);
cplx digamma(cplx z);

double beta_function(double p, double q);
cplx beta_function(cplx p, cplx q);

double h_lambda(double lambda);

cplx psi(double lambda, cplx mu);
cplx psi_derivative(double lambda, cplx mu);

cplx dispersion_root(double lambda);

struct ModelParams {
    double lambda = 0.0;
    double h_lambda = 0.0;
    cplx mu_plus;
    double alpha = 0.0;
    double beta = 0.0;
    double k_interval_upper = 0.0;

    static ModelParams make(double lambda);
};

void check_lambda(double lambda);

}  // namespace coagscale::special
