#include "special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace coagscale::special {

namespace {

constexpr std::array<double, 14> kLanczos = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

template <class T>
T lanczos_log_gamma(T z) {
    T y = z;
    T tmp = z + 5.24218750000000000;
    tmp = (z + 0.5) * std::log(tmp) - tmp;
    T ser = T(0.999999999999997092);
    for (double c : kLanczos) {
        y += 1.0;
        ser += c / y;
    }
    return tmp + std::log(2.5066282746310005 * ser / z);
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    return lanczos_log_gamma(x);
}

cplx log_gamma(cplx z) {
    if (!(z.real() > 0.0)) throw DomainError("log_gamma: real part must be positive");
    return lanczos_log_gamma(z);
}

double gamma(double x) {
    if (!std::isfinite(x)) throw DomainError("gamma: non-finite argument");
    if (x > 0.0) return std::exp(lanczos_log_gamma(x));
    if (x == std::floor(x)) throw DomainError("gamma: pole at non-positive integer");
    double s = std::sin(std::numbers::pi * x);
    return std::numbers::pi / (s * std::exp(lanczos_log_gamma(1.0 - x)));
}

cplx digamma(cplx z) {
    if (!(z.real() > 0.0)) throw DomainError("digamma: real part must be positive");
    cplx acc = 0.0;
    while (std::abs(z) < 12.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    cplx zi2 = 1.0 / (z * z);
    // Bernoulli tail B_2k / (2k z^2k)
    cplx tail = zi2 * (1.0 / 12 - zi2 * (1.0 / 120 - zi2 * (1.0 / 252 - zi2 * (1.0 / 240 - zi2 * (1.0 / 132)))));
    return acc + std::log(z) - 0.5 / z - tail;
}

double beta_function(double p, double q) {
    if (!(p > 0.0 && q > 0.0)) throw DomainError("beta_function: arguments must be positive");
    return std::exp(lanczos_log_gamma(p) + lanczos_log_gamma(q) - lanczos_log_gamma(p + q));
}

cplx beta_function(cplx p, cplx q) {
    if (!(p.real() > 0.0 && q.real() > 0.0))
        throw DomainError("beta_function: real parts must be positive");
    return std::exp(lanczos_log_gamma(p) + lanczos_log_gamma(q) - lanczos_log_gamma(p + q));
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 0.5))
        throw DomainError("lambda must lie in (0, 1/2), got " + std::to_string(lambda));
}

double h_lambda(double lambda) {
    check_lambda(lambda);
    return lambda / beta_function(1.0 - lambda, 1.0 - lambda);
}

cplx psi(double lambda, cplx mu) {
    check_lambda(lambda);
    double b0 = beta_function(1.0 - lambda, 1.0 - lambda);
    cplx b1 = beta_function(cplx(1.0 - lambda), 1.0 - lambda + mu);
    return (lambda - mu) * b0 - (2.0 * lambda - mu) * b1;
}

cplx psi_derivative(double lambda, cplx mu) {
    check_lambda(lambda);
    double b0 = beta_function(1.0 - lambda, 1.0 - lambda);
    cplx q = 1.0 - lambda + mu;
    cplx b1 = beta_function(cplx(1.0 - lambda), q);
    cplx db1 = b1 * (digamma(q) - digamma(q + 1.0 - lambda));
    return -b0 + b1 - (2.0 * lambda - mu) * db1;
}

cplx dispersion_root(double lambda) {
    check_lambda(lambda);
    cplx mu(0.5 * lambda, std::sqrt(lambda));
    cplx f = psi(lambda, mu);
    double res = std::abs(f);
    for (int it = 0; it < 100; ++it) {
        if (res == 0.0) break;
        cplx step = f / psi_derivative(lambda, mu);
        double damp = 1.0;
        cplx trial;
        cplx ftrial;
        double rtrial = 0.0;
        for (int k = 0; k < 40; ++k) {
            trial = mu - damp * step;
            if (trial.real() > -(1.0 - lambda)) {
                ftrial = psi(lambda, trial);
                rtrial = std::abs(ftrial);
                if (rtrial < res) break;
            }
            damp *= 0.5;
        }
        if (!(rtrial < res)) break;
        bool tiny = std::abs(mu - trial) <= 1e-16 * std::abs(mu);
        mu = trial;
        f = ftrial;
        res = rtrial;
        if (tiny) break;
    }
    if (!(res < 1e-12))
        throw NumericalError("dispersion_root: no convergence, residual " + std::to_string(res));
    if (!(mu.real() > 0.0 && mu.real() < lambda && mu.imag() > 0.0))
        throw NumericalError("dispersion_root: converged to a root outside the admissible strip");
    return mu;
}

ModelParams ModelParams::make(double lambda) {
    check_lambda(lambda);
    ModelParams p;
    p.lambda = lambda;
    p.h_lambda = special::h_lambda(lambda);
    p.mu_plus = dispersion_root(lambda);
    p.alpha = p.mu_plus.imag();
    p.beta = p.mu_plus.real();
    p.k_interval_upper = std::exp(2.0 * std::numbers::pi * p.beta / p.alpha);
    return p;
}

}  // namespace coagscale::special
