// special.hpp: complex-order special functions for the Landau-Zener propagator

#pragma once

#include <complex>

namespace cqd::special {

using cplx = std::complex<double>;

// ln Gamma(z) for complex z (principal branch up to multiples of 2 pi i; only ever
// exponentiated). Throws DomainError at the poles z = 0, -1, -2, ...
cplx lgamma(cplx z);

// 1 / Gamma(z); exactly zero at the poles.
cplx rgamma(cplx z);

// Parabolic cylinder function D_nu(z) and its derivative, stored as
// exp(log_scale) * (value, derivative) so large |nu| cannot overflow.
struct PcfResult {
    cplx value;
    cplx derivative;
    double log_scale{0.0};

    cplx scaled_value() const { return value * std::exp(log_scale); }
    cplx scaled_derivative() const { return derivative * std::exp(log_scale); }
};

// Solves Weber's equation w'' = (z^2/4 - nu - 1/2) w along the straight path from 0,
// starting from the exact values D_nu(0) and D_nu'(0).
PcfResult pcf(cplx nu, cplx z, double rel_tol = 1e-13);

} // namespace cqd::special
